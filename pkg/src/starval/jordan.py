"""Jordan decomposition V = V+ - V- of radial valuations.

``V+(f) = sup{V(g) : 0 <= g <= f}`` is approximated directly by searching
over ladder functions ``g_i in {0, f_i/L, ..., f_i}``. For theta
valuations the closed form ``V+(f) = integral theta_plus(f) dm`` from
:func:`starval.theta.decompose_theta` is checked against that search.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BudgetExceeded, InvalidArgument
from .kernels import ladder_argmax
from .sphere_grid import make_circle_grid
from .star_body import RadialFunction, rotate, rotate_sampled, sample
from .theta import ThetaCurve, decompose_theta, eval_theta
from .valuation import ThetaValuation, random_bodies

DEFAULT_BUDGET = 10_000_000
SPLIT_TOL = 1e-12
IMPROVE_TOL = 1e-15


@dataclass
class LadderSearchResult:
    value: float
    maximizer: RadialFunction
    levels: np.ndarray
    evaluations: int
    mode: str

    def to_dict(self) -> dict:
        return {"value": self.value, "maximizer": self.maximizer.values.tolist(),
                "levels": self.levels.tolist(), "evaluations": self.evaluations, "mode": self.mode}


def _ladder_values(f: RadialFunction, L: int) -> np.ndarray:
    # rung k at node i is k * f_i / L; the top rung is f_i exactly
    k = np.arange(L + 1, dtype=np.float64)
    rungs = f.values[:, None] * k[None, :] / L
    rungs[:, L] = f.values
    return rungs


def _theta_table(spec: ThetaValuation, f: RadialFunction, L: int) -> np.ndarray:
    rungs = _ladder_values(f, L)
    return np.ascontiguousarray(f.grid.weights[:, None] * eval_theta(spec.curve, rungs))


def _exhaustive_table(table: np.ndarray, workers: int):
    m = table.shape[1]
    if workers <= 1 or m < 2:
        return ladder_argmax(table)
    cuts = np.linspace(0, m, min(workers, m) + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda lh: ladder_argmax(table, int(lh[0]), int(lh[1])),
                              zip(cuts[:-1], cuts[1:])))
    # partitions are in enumeration order; strict > keeps the first maximum
    best, levels, count = -math.inf, None, 0
    for v, lev, c in parts:
        count += c
        if c and v > best:
            best, levels = v, lev
    return best, levels, count


def _exhaustive_blackbox(spec, f: RadialFunction, L: int):
    rungs = _ladder_values(f, L)
    n = f.grid.size
    best, best_lev, count = -math.inf, None, 0
    for flat in range((L + 1) ** n):
        lev = np.array(np.unravel_index(flat, (L + 1,) * n), dtype=np.intp)
        v = spec.evaluate(RadialFunction(f.grid, rungs[np.arange(n), lev]))
        count += 1
        if v > best:
            best, best_lev = v, lev
    return best, best_lev, count


def _greedy(objective, n, L, start, rng):
    """Coordinate ascent over ladder levels from ``start``; returns (value, levels, evals)."""
    lev = start.copy()
    cur = objective(lev)
    evals = 1
    while True:
        improved = False
        for i in rng.permutation(n):
            keep = lev[i]
            best_k, best_v = keep, cur
            for k in range(L + 1):
                if k == keep:
                    continue
                lev[i] = k
                v = objective(lev)
                evals += 1
                if v > best_v + IMPROVE_TOL:
                    best_k, best_v = k, v
            lev[i] = best_k
            if best_k != keep:
                cur = best_v
                improved = True
        if not improved:
            return cur, lev, evals


def sup_search_decompose(V, f: RadialFunction, levels: int, mode: str = "exhaustive",
                         budget: int = DEFAULT_BUDGET, restarts: int = 4, seed: int = 0,
                         approximate_ok: bool = False, workers: int = 1) -> LadderSearchResult:
    """Approximate ``V+(f) = sup{V(g) : 0 <= g <= f}`` over the ladder of ``f``.

    ``exhaustive`` enumerates all ``(levels + 1) ** N`` ladder functions and
    raises :class:`BudgetExceeded` beyond ``budget``. ``greedy`` runs seeded
    coordinate ascent from the top, the bottom and ``restarts`` random
    ladder points; on instances too large for exhaustive search it requires
    ``approximate_ok=True``.
    """
    L = int(levels)
    if L < 1:
        raise InvalidArgument("levels must be >= 1")
    n = f.grid.size
    required = (L + 1) ** n
    if mode == "exhaustive":
        if required > budget:
            raise BudgetExceeded(required, budget)
        if isinstance(V, ThetaValuation):
            value, lev, count = _exhaustive_table(_theta_table(V, f, L), workers)
        else:
            value, lev, count = _exhaustive_blackbox(V, f, L)
    elif mode == "greedy":
        if required > budget and not approximate_ok:
            raise InvalidArgument(
                f"instance needs {required} evaluations for exhaustive search; "
                "pass approximate_ok=True to accept a greedy local maximum")
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
        if isinstance(V, ThetaValuation):
            table = _theta_table(V, f, L)
            idx = np.arange(n)

            def objective(lev):
                return float(np.sum(table[idx, lev]))
        else:
            rungs = _ladder_values(f, L)
            idx = np.arange(n)

            def objective(lev):
                return V.evaluate(RadialFunction(f.grid, rungs[idx, lev]))

        starts = [np.full(n, L, dtype=np.intp), np.zeros(n, dtype=np.intp)]
        starts += [rng.integers(0, L + 1, size=n).astype(np.intp) for _ in range(int(restarts))]
        value, lev, count = -math.inf, None, 0
        for s in starts:
            v, l_, c = _greedy(objective, n, L, s, rng)
            count += c
            if v > value:
                value, lev = v, l_.copy()
    else:
        raise InvalidArgument(f"unknown search mode {mode!r}")
    lev = np.asarray(lev, dtype=np.intp)
    g = _ladder_values(f, L)[np.arange(n), lev]
    return LadderSearchResult(float(value), RadialFunction(f.grid, g), lev, int(count), mode)


@dataclass
class DecompositionReport:
    theta_plus: ThetaCurve
    theta_minus: ThetaCurve
    offset: float
    max_reconstruction_residual: float
    min_Vplus: float
    min_Vminus: float
    Vplus_at_origin: float
    Vminus_at_origin: float
    invariance_deviation: float | None = None
    tolerance: float = 1e-9

    @property
    def flags(self) -> dict:
        f = {
            "reconstruction": self.max_reconstruction_residual <= self.tolerance,
            "Vplus_nonnegative": self.min_Vplus >= -SPLIT_TOL,
            "Vminus_nonnegative": self.min_Vminus >= -SPLIT_TOL,
            "origin_normalized": self.Vplus_at_origin == 0.0 and self.Vminus_at_origin == 0.0,
        }
        if self.invariance_deviation is not None:
            f["rotation_invariant"] = self.invariance_deviation <= SPLIT_TOL
        return f

    @property
    def ok(self) -> bool:
        return all(self.flags.values())

    def to_dict(self, include_curves: bool = False) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("theta_plus", "theta_minus")}
        d["flags"] = self.flags
        d["ok"] = self.ok
        if include_curves:
            d["theta_plus"] = self.theta_plus.to_dict()
            d["theta_minus"] = self.theta_minus.to_dict()
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def split_valuation(V: ThetaValuation, resolution: int = 100_001):
    """``(V+, V-, offset)`` as theta valuations."""
    plus, minus, offset = decompose_theta(V.curve, resolution)
    return ThetaValuation(plus), ThetaValuation(minus), offset


def verify_decomposition(V: ThetaValuation, bodies, rotations=None, generators=None,
                         resolution: int = 100_001, tolerance: float = 1e-9) -> DecompositionReport:
    """Check ``V = V+ - V- + offset`` with ``V+, V- >= 0`` on the given bodies.

    ``rotations`` may hold integer grid steps, applied to every body on a
    circle grid, and orthogonal matrices, applied to ``generators`` (a list
    of ``(BodyGenerator, SphereGrid)`` pairs). The recorded invariance
    deviation is the worst over V, V+ and V-.
    """
    if not isinstance(V, ThetaValuation):
        raise InvalidArgument("verify_decomposition needs a theta valuation")
    bodies = list(bodies)
    if not bodies:
        raise InvalidArgument("need at least one body")
    Vp, Vm, offset = split_valuation(V, resolution)
    resid, min_p, min_m = 0.0, math.inf, math.inf
    for K in bodies:
        v, p, m = V.evaluate(K), Vp.evaluate(K), Vm.evaluate(K)
        resid = max(resid, abs(p - m - (v - offset)))
        min_p, min_m = min(min_p, p), min(min_m, m)
    origin = RadialFunction.origin(bodies[0].grid)
    dev = None
    if rotations is not None:
        dev = 0.0
        steps = [r for r in rotations if isinstance(r, (int, np.integer))]
        mats = [r for r in rotations if not isinstance(r, (int, np.integer))]
        for spec in (V, Vp, Vm):
            for K in bodies:
                if steps and K.grid.kind == "circle":
                    base = spec.evaluate(K)
                    for k in steps:
                        dev = max(dev, abs(base - spec.evaluate(rotate_sampled(K, k))))
            for gen, grid in (generators or ()):
                base = spec.evaluate(sample(gen, grid))
                for R in mats:
                    dev = max(dev, abs(base - spec.evaluate(sample(rotate(gen, R), grid))))
    return DecompositionReport(Vp.curve, Vm.curve, offset, resid, min_p, min_m,
                               Vp.evaluate(origin), Vm.evaluate(origin), dev, tolerance)


@dataclass
class AgreementRow:
    trial: int
    N: int
    L: int
    disagreement: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.disagreement <= self.bound


def oracle_agreement(V: ThetaValuation, grid_sizes, L: int, trials: int, seed: int = 0,
                     resolution: int = 100_001, budget: int = DEFAULT_BUDGET, workers: int = 1):
    """Compare exhaustive ladder search against ``integral theta_plus(f) dm``.

    For each grid size and trial a rough body ``f`` with values uniform on
    ``[0, lambda_max]`` is drawn (stream ``spawn``-ed from ``seed``). The
    ladder sup of ``V - offset`` can fall short of the continuum sup by at
    most ``Lip(theta) * ||f||_inf / L``, which is reported as the bound.
    """
    Vp, _, offset = split_valuation(V, resolution)
    lip = V.curve.lipschitz()
    rows = []
    streams = np.random.SeedSequence(int(seed)).spawn(len(grid_sizes) * int(trials))
    s = 0
    for N in grid_sizes:
        grid = make_circle_grid(int(N))
        for t in range(int(trials)):
            vals = random_bodies(grid, 1, V.lambda_max, streams[s].generate_state(1)[0])[0]
            s += 1
            f = RadialFunction(grid, vals)
            res = sup_search_decompose(V, f, L, "exhaustive", budget=budget, workers=workers)
            closed = Vp.evaluate(f)
            rows.append(AgreementRow(t, int(N), int(L), abs((res.value - offset) - closed),
                                     lip * f.sup_norm() / L))
    return rows


def agreement_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "N", "L", "disagreement", "bound"])
    for r in rows:
        w.writerow([r.trial, r.N, r.L, repr(r.disagreement), repr(r.bound)])
    return buf.getvalue()
