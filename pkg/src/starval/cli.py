"""Command-line front end: ``starval {grid,body,eval,decompose,check,rims,split}``.

Exit codes: 0 success, 1 property or domain failure, 2 usage/config error.
Randomized commands take ``--seed``; without it ``STARVAL_SEED`` is used,
then 0. Reports carry no timestamps, so identical inputs give identical
bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .cover_tools import (
    NodeSet,
    partition_of_unity,
    rim_decay_profile,
    rim_table_to_csv,
    split_function,
)
from .errors import DomainError, InvalidArgument, StarvalError
from .jordan import oracle_agreement, split_valuation, verify_decomposition
from .sphere_grid import make_circle_grid, make_latlong_grid, make_mc_grid
from .star_body import BodyGenerator, RadialFunction, rotation_2d, sample
from .theta import ThetaCurve, decomposition_table, table_to_csv
from .valuation import (
    ThetaValuation,
    check_bounded_on_bounded,
    check_continuity,
    check_rotational_invariance,
    random_bodies,
    valuation_residual,
)

TWO_PI = 2.0 * math.pi
CHECKS = ("identity", "invariance", "bounded", "continuity", "rims", "oracle", "split")


class UsageError(Exception):
    pass


# descriptors ---------------------------------------------------------------

def _split(desc):
    name, _, rest = desc.partition(":")
    try:
        nums = [float(v) for v in rest.split(",")] if rest else []
    except ValueError:
        raise UsageError(f"bad numeric parameters in {desc!r}") from None
    return name.strip().lower(), nums


def parse_grid(desc: str, seed: int = 0):
    name, p = _split(desc)
    try:
        if name == "circle" and len(p) == 1:
            return make_circle_grid(int(p[0]))
        if name == "latlong" and len(p) == 2:
            return make_latlong_grid(int(p[0]), int(p[1]))
        if name in ("mc", "montecarlo") and len(p) == 2:
            return make_mc_grid(int(p[0]), int(p[1]), seed)
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown grid descriptor {desc!r} (circle:N, latlong:P,Q, mc:n,N)")


def parse_theta(desc: str, domain: float):
    name, p = _split(desc)
    try:
        if name == "power" and len(p) in (1, 2):
            return ThetaCurve.power(p[0], domain, p[1] if len(p) == 2 else 1.0)
        if name == "neg-power" and len(p) == 1:
            return ThetaCurve.power(p[0], domain, -1.0)
        if name == "sine" and len(p) == 2:
            return ThetaCurve.sine(p[0], p[1], domain)
        if name in ("poly", "polynomial") and p:
            return ThetaCurve.polynomial(p, domain)
        if name in ("pl", "piecewise") and len(p) >= 4 and len(p) % 2 == 0:
            return ThetaCurve.piecewise_linear(p[0::2], p[1::2])
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown theta descriptor {desc!r} "
                     "(power:k[,c], neg-power:k, sine:f,a, poly:c0,..., pl:x0,y0,...)")


def parse_body(desc: str, dim: int):
    name, p = _split(desc)
    try:
        if name == "origin" and not p:
            return BodyGenerator.origin(dim)
        if name == "ball" and len(p) == 1:
            return BodyGenerator.ball(p[0], dim)
        if name == "ellipsoid" and len(p) == dim:
            return BodyGenerator.ellipsoid(*p)
        if name == "trigblob" and len(p) >= 1 and len(p) % 2 == 1 and dim == 2:
            terms = [(k + 1, p[1 + 2 * k], p[2 + 2 * k]) for k in range((len(p) - 1) // 2)]
            return BodyGenerator.trigblob(p[0], terms)
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown body descriptor {desc!r} for n={dim} "
                     "(origin, ball:r, ellipsoid:a1,...,an, trigblob:c0,a1,b1,...)")


# output helpers ------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("STARVAL_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"STARVAL_SEED must be an integer, got {env!r}") from None
    return 0


# commands ------------------------------------------------------------------

def cmd_grid(args):
    grid = parse_grid(args.grid, _seed(args))
    if args.format == "csv":
        n = grid.dim
        rows = [list(t) + [w] for t, w in zip(grid.nodes.tolist(), grid.weights.tolist())]
        _emit(args, _rows_csv([f"t{i + 1}" for i in range(n)] + ["weight"], rows))
    else:
        _emit(args, dumps(grid.to_dict()))
    return 0


def cmd_body(args):
    grid = parse_grid(args.grid, _seed(args))
    gen = parse_body(args.body[0] if args.body else "ball:1", grid.dim)
    body = sample(gen, grid)
    if args.format == "csv":
        _emit(args, body.to_csv())
    else:
        d = body.to_dict()
        d["generator"] = gen.to_dict()
        _emit(args, dumps(d))
    return 0


def cmd_eval(args):
    seed = _seed(args)
    grid = parse_grid(args.grid, seed)
    gens = [(d, parse_body(d, grid.dim)) for d in (args.body or ["ball:1"])]
    bodies = [(d, sample(g, grid)) for d, g in gens]
    domain = args.domain
    if domain is None:
        domain = max([b.sup_norm() for _, b in bodies] + [1.0])
    V = ThetaValuation(parse_theta(args.theta, domain))
    results = [{"body": d, "value": V.evaluate(b)} for d, b in bodies]
    if args.format == "csv":
        _emit(args, _rows_csv(["body", "value"], [(r["body"], r["value"]) for r in results]))
    else:
        _emit(args, dumps({"command": "eval", "grid": grid.descriptor(), "theta": V.curve.to_dict(),
                           "seed": seed, "results": results}))
    return 0


def _default_domain(args, fallback=TWO_PI):
    return fallback if args.domain is None else args.domain


def cmd_decompose(args):
    seed = _seed(args)
    curve = parse_theta(args.theta, _default_domain(args))
    grid = parse_grid(args.grid, seed)
    step = args.step if args.step else curve.domain_max / 100.0
    table = decomposition_table(curve, step, args.resolution)
    V = ThetaValuation(curve)
    rows = random_bodies(grid, args.bodies, curve.domain_max, seed)
    bodies = [RadialFunction(grid, r) for r in rows] + [RadialFunction.origin(grid)]
    rotations = None
    if grid.kind == "circle":
        rotations = sorted({1, grid.size // 4, grid.size // 2} - {0})
    report = verify_decomposition(V, bodies, rotations=rotations,
                                  resolution=args.resolution, tolerance=args.tol)
    payload = {"command": "decompose", "theta": curve.to_dict(), "grid": grid.descriptor(),
               "seed": seed, "params": {"bodies": args.bodies, "resolution": args.resolution,
                                        "step": step, "rotations": rotations},
               "report": report.to_dict()}
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(dumps(payload))
    if args.format == "csv":
        _emit(args, table_to_csv(table))
    else:
        payload["table"] = {"columns": ["lambda", "theta", "theta_plus", "theta_minus"],
                            "rows": table.tolist()}
        _emit(args, dumps(payload))
    if not report.ok:
        failed = [k for k, v in report.flags.items() if not v]
        print(f"decomposition verification failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def _check_identity(args, seed):
    curve = parse_theta(args.theta or "sine:1,1", _default_domain(args))
    grid = parse_grid(args.grid or "circle:256", seed)
    V = ThetaValuation(curve)
    rows = random_bodies(grid, 2 * args.pairs, curve.domain_max, seed)
    worst_ratio, worst = 0.0, 0.0
    for i in range(args.pairs):
        K, L = RadialFunction(grid, rows[2 * i]), RadialFunction(grid, rows[2 * i + 1])
        r = abs(valuation_residual(V, K, L))
        scale = 1.0 + abs(V.evaluate(K)) + abs(V.evaluate(L))
        worst = max(worst, r)
        worst_ratio = max(worst_ratio, r / scale)
    tol = args.tol if args.tol is not None else 1e-12
    return ({"pairs": args.pairs, "grid": grid.descriptor(), "theta": curve.to_dict(), "tol": tol},
            {"max_residual": worst, "max_scaled_residual": worst_ratio},
            None, {"valuation_identity": worst_ratio <= tol})


def _check_invariance(args, seed):
    curve = parse_theta(args.theta or "sine:1,1", _default_domain(args))
    grid = parse_grid(args.grid or "circle:360", seed)
    if grid.kind != "circle":
        raise UsageError("invariance check runs on circle grids")
    N = grid.size
    V = ThetaValuation(curve)
    Vp, Vm, _ = split_valuation(V, args.resolution)
    gens = [BodyGenerator.ellipsoid(2.0, 1.0),
            BodyGenerator.trigblob(1.0, [(2, 0.3, 0.1), (3, 0.05, 0.2)], floor=0.05)]
    steps = sorted({1, 7, N // 4, N // 2, N - 1} - {0})
    mats = [rotation_2d(2 * math.pi * k / N) for k in steps]
    tol = args.tol if args.tol is not None else 1e-12
    result, props = {}, {}
    for name, spec in (("V", V), ("V_plus", Vp), ("V_minus", Vm)):
        dev = 0.0
        for g in gens:
            dev = max(dev, check_rotational_invariance(spec, g, steps, grid),
                      check_rotational_invariance(spec, g, mats, grid))
        result[f"deviation_{name}"] = dev
        props[f"invariant_{name}"] = dev <= tol
    return ({"grid": grid.descriptor(), "steps": steps, "theta": curve.to_dict(), "tol": tol},
            result, None, props)


def _check_bounded(args, seed):
    lam = args.lam if args.lam is not None else 2.0
    curve = parse_theta(args.theta or "power:2", _default_domain(args, fallback=lam))
    grid = parse_grid(args.grid or "circle:3", seed)
    rep = check_bounded_on_bounded(ThetaValuation(curve), lam, args.trials, seed, grid, args.model)
    return ({"lambda": lam, "trials": args.trials, "grid": grid.descriptor(), "theta": curve.to_dict(),
             "model": args.model},
            rep.to_dict(), None, {"below_analytic_bound": rep.empirical <= rep.analytic + 1e-12})


def _check_continuity(args, seed):
    curve = parse_theta(args.theta or "sine:1,1", _default_domain(args))
    grid = parse_grid(args.grid or "circle:256", seed)
    body = sample(parse_body(args.body[0] if args.body else "ellipsoid:2,1" if grid.dim == 2
                             else "ball:1", grid.dim), grid)
    deltas = args.deltas or [0.1, 0.01, 0.001, 0.0001, 0.0]
    table = check_continuity(ThetaValuation(curve), body, deltas, args.probes, seed)
    lip = curve.lipschitz()
    ok = all(dev <= lip * d + 1e-12 for d, dev in table) if math.isfinite(lip) else True
    return ({"deltas": deltas, "probes": args.probes, "grid": grid.descriptor(), "theta": curve.to_dict()},
            {"lipschitz": lip}, {"columns": ["delta", "max_deviation"], "rows": table},
            {"lipschitz_modulus": ok})


def _rim_rows(args, seed):
    lam = args.lam if args.lam is not None else 2.0
    curve = parse_theta(args.theta or "sine:1,1", _default_domain(args))
    grid = parse_grid(args.grid or "circle:1024", seed)
    if args.point_base:
        A = NodeSet.from_indices(grid, [0])
    else:
        A = NodeSet.cap(grid, grid.nodes[0], args.cap_radius)
    omegas = args.omegas or [1.0, 0.5, 0.25, 0.125, 0.0625]
    rows = rim_decay_profile(ThetaValuation(curve), A, lam, omegas, args.bumps, seed)
    params = {"lambda": lam, "omegas": omegas, "grid": grid.descriptor(), "theta": curve.to_dict(),
              "base": "point" if args.point_base else {"cap_radius": args.cap_radius},
              "random_bumps": args.bumps}
    return params, rows


def _check_rims(args, seed):
    params, rows = _rim_rows(args, seed)
    props = {
        "within_envelope": all(r.sup_abs_V <= r.envelope + 1e-12 for r in rows),
        "band_measure_decreasing": all(b.band_measure < a.band_measure for a, b in zip(rows, rows[1:])),
        "decays": rows[-1].sup_abs_V < rows[0].sup_abs_V,
    }
    table = {"columns": ["omega", "sup_abs_V", "band_measure", "envelope"],
             "rows": [[r.omega, r.sup_abs_V, r.band_measure, r.envelope] for r in rows]}
    return params, {"final_over_first": rows[-1].sup_abs_V / rows[0].sup_abs_V
                    if rows[0].sup_abs_V else None}, table, props


def _check_oracle(args, seed):
    curve = parse_theta(args.theta or "sine:1,1", _default_domain(args))
    rows = oracle_agreement(ThetaValuation(curve), [args.nodes], args.levels, args.trials, seed,
                            resolution=args.resolution, workers=args.workers)
    table = {"columns": ["trial", "N", "L", "disagreement", "bound"],
             "rows": [[r.trial, r.N, r.L, r.disagreement, r.bound] for r in rows]}
    return ({"nodes": args.nodes, "levels": args.levels, "trials": args.trials, "theta": curve.to_dict()},
            {"max_disagreement": max(r.disagreement for r in rows),
             "max_ratio": max(r.disagreement / r.bound if r.bound else 0.0 for r in rows)},
            table, {"within_ladder_bound": all(r.ok for r in rows)})


def _two_arcs(grid, half_width):
    return [NodeSet.arc(grid, 0.0, half_width), NodeSet.arc(grid, math.pi, half_width)]


def _check_split(args, seed):
    grid = parse_grid(args.grid or "circle:512", seed)
    if grid.kind != "circle":
        raise UsageError("split check runs on circle grids")
    covers = _two_arcs(grid, args.half_width)
    phi = partition_of_unity(grid, covers)
    union_mask = np.logical_or.reduce([G.mask for G in covers])
    max_one = bool(np.all(phi.max(axis=0)[union_mask] == 1.0))
    support = all(np.all(p[~G.mask] == 0.0) for p, G in zip(phi, covers))
    rng_rows = random_bodies(grid, args.trials, 1.0, seed) * union_mask
    recon = True
    for r in rng_rows:
        f = RadialFunction(grid, r)
        pieces = split_function(f, phi)
        stack = np.vstack([p.values for p in pieces])
        recon &= bool(np.array_equal(stack.max(axis=0), f.values)) and bool(np.all(stack <= f.values))
    return ({"grid": grid.descriptor(), "half_width": args.half_width, "trials": args.trials},
            {"covered_nodes": int(union_mask.sum())}, None,
            {"max_phi_is_one": max_one, "support_in_cover": support, "split_reconstructs": recon})


_CHECK_FUNCS = {
    "identity": _check_identity, "invariance": _check_invariance, "bounded": _check_bounded,
    "continuity": _check_continuity, "rims": _check_rims, "oracle": _check_oracle, "split": _check_split,
}


def cmd_check(args):
    seed = _seed(args)
    params, result, table, props = _CHECK_FUNCS[args.name](args, seed)
    passed = all(props.values())
    report = {"check": args.name, "params": params, "seed": seed, "result": result,
              "properties": props, "passed": passed}
    if table is not None:
        report["table"] = table
    if args.format == "csv":
        if table is not None:
            _emit(args, _rows_csv(table["columns"], table["rows"]))
        else:
            _emit(args, _rows_csv(["property", "passed"], sorted(props.items())))
    else:
        _emit(args, dumps(report))
    return 0 if passed else 1


def cmd_rims(args):
    seed = _seed(args)
    params, rows = _rim_rows(args, seed)
    if args.format == "csv":
        _emit(args, rim_table_to_csv(rows))
    else:
        _emit(args, dumps({"command": "rims", "params": params, "seed": seed,
                           "table": {"columns": ["omega", "sup_abs_V", "band_measure"],
                                     "rows": [[r.omega, r.sup_abs_V, r.band_measure] for r in rows]}}))
    return 0


def cmd_split(args):
    seed = _seed(args)
    grid = parse_grid(args.grid or "circle:64", seed)
    if args.cover:
        covers = []
        for d in args.cover:
            name, p = _split(d)
            if name != "arc" or len(p) != 2 or grid.kind != "circle":
                raise UsageError(f"cover descriptor {d!r}: expected arc:center,half_width on a circle grid")
            covers.append(NodeSet.arc(grid, p[0], p[1]))
    else:
        if grid.kind != "circle":
            raise UsageError("default covers are arcs; use a circle grid")
        covers = _two_arcs(grid, args.half_width)
    phi = partition_of_unity(grid, covers)
    body = sample(parse_body(args.body[0] if args.body else "ball:1", grid.dim), grid)
    covered = phi.max(axis=0) > 0
    body = RadialFunction(grid, np.where(covered, body.values, 0.0))
    pieces = split_function(body, phi)
    k = len(covers)
    header = ["node", "angle"] + [f"phi_{i + 1}" for i in range(k)] + ["f"] + [f"f_{i + 1}" for i in range(k)]
    angles = grid.angles()
    rows = [[i, float(angles[i])] + [float(p[i]) for p in phi] + [float(body.values[i])]
            + [float(p.values[i]) for p in pieces] for i in range(grid.size)]
    if args.format == "csv":
        _emit(args, _rows_csv(header, rows))
    else:
        _emit(args, dumps({"command": "split", "grid": grid.descriptor(), "seed": seed,
                           "covers": [G.to_dict() for G in covers],
                           "table": {"columns": header, "rows": rows}}))
    return 0


# parser --------------------------------------------------------------------

def _common():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=None, help="defaults to $STARVAL_SEED, then 0")
    common.add_argument("--config", help="JSON file of option defaults")
    common.add_argument("--grid", default=None, help="circle:N | latlong:P,Q | mc:n,N")
    common.add_argument("--theta", default=None, help="power:k | neg-power:k | sine:f,a | poly:... | pl:...")
    common.add_argument("--domain", type=float, default=None, help="lambda_max of theta")
    common.add_argument("--body", action="append", help="origin | ball:r | ellipsoid:a,b | trigblob:c0,a1,b1,...")
    common.add_argument("--resolution", type=int, default=100_001)
    common.add_argument("--tol", type=float, default=None)
    return common


def _rim_opts():
    rim_opts = argparse.ArgumentParser(add_help=False)
    rim_opts.add_argument("--lam", type=float, default=None)
    rim_opts.add_argument("--point-base", action="store_true", help="use a single node as the base set")
    rim_opts.add_argument("--cap-radius", type=float, default=0.3)
    rim_opts.add_argument("--omegas", type=float, nargs="+")
    rim_opts.add_argument("--bumps", type=int, default=16)
    return rim_opts


def build_parser():
    # parents share Action objects, so every subcommand gets fresh ones

    p = argparse.ArgumentParser(prog="starval", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("grid", parents=[_common()], help="build and print a sphere grid")
    sp.set_defaults(func=cmd_grid, grid="circle:64")
    sp = sub.add_parser("body", parents=[_common()], help="sample a body on a grid")
    sp.set_defaults(func=cmd_body, grid="circle:64")
    sp = sub.add_parser("eval", parents=[_common()], help="evaluate a theta valuation on bodies")
    sp.set_defaults(func=cmd_eval, grid="circle:256", theta="power:1")

    sp = sub.add_parser("decompose", parents=[_common()], help="Jordan decomposition of theta")
    sp.add_argument("--step", type=float, default=None)
    sp.add_argument("--bodies", type=int, default=100)
    sp.add_argument("--report", help="also write the JSON report here")
    sp.set_defaults(func=cmd_decompose, grid="circle:256", theta="sine:1,1", tol=1e-9)

    sp = sub.add_parser("check", parents=[_common(), _rim_opts()], help="run a property suite")
    sp.add_argument("name", choices=CHECKS)
    sp.add_argument("--pairs", type=int, default=100)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--nodes", type=int, default=6)
    sp.add_argument("--levels", type=int, default=8)
    sp.add_argument("--probes", type=int, default=100)
    sp.add_argument("--deltas", type=float, nargs="+")
    sp.add_argument("--half-width", type=float, default=math.pi / 2 + 0.2)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--model", choices=("rough", "smooth"), default="rough", help="random body family")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("rims", parents=[_common(), _rim_opts()], help="rim decay table")
    sp.set_defaults(func=cmd_rims)

    sp = sub.add_parser("split", parents=[_common()], help="partition of unity and split pieces")
    sp.add_argument("--cover", action="append", help="arc:center,half_width (repeatable)")
    sp.add_argument("--half-width", type=float, default=math.pi / 2 + 0.2)
    sp.set_defaults(func=cmd_split)
    return p


_TRIAL_DEFAULTS = {"bounded": 10_000, "oracle": 50, "split": 20}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            print(f"starval: cannot read config: {exc}", file=sys.stderr)
            return 2
        if not isinstance(cfg, dict):
            print("starval: config must be a JSON object", file=sys.stderr)
            return 2
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        cfg.pop("command", None)
        # explicit command-line flags win over the config file
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    if getattr(args, "trials", 1) is None:
        args.trials = _TRIAL_DEFAULTS.get(getattr(args, "name", ""), 100)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"starval: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"starval: domain error: {exc}", file=sys.stderr)
        return 1
    except InvalidArgument as exc:
        print(f"starval: {exc}", file=sys.stderr)
        return 2
    except StarvalError as exc:
        print(f"starval: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
