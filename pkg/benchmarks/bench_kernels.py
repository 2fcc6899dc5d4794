"""Compare the compiled kernels with their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each kernel runs on identical inputs under both backends; outputs are
checked for equality before timings are reported (best of ``--repeat``).
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from starval import _pykernels

try:
    from starval import _ckernels
except ImportError:
    _ckernels = None


def _cases(rng):
    table6 = np.ascontiguousarray(rng.normal(size=(6, 9)))
    table7 = np.ascontiguousarray(rng.normal(size=(7, 9)))
    x = np.linspace(0.0, 2 * np.pi, 100_001)
    y = np.sin(x) + 0.3 * np.sin(7 * x)
    pts = rng.normal(size=(4096, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    targets = np.ascontiguousarray(pts[:256])
    return {
        "ladder_argmax N=6 L=8": ("ladder_argmax", (table6,)),
        "ladder_argmax N=7 L=8": ("ladder_argmax", (table7,)),
        "running_max_pl 1e5 nodes": ("running_max_pl", (x, y)),
        "min_chordal_distance 4096x256": ("min_chordal_distance", (pts, targets)),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(u, v) for u, v in zip(a, b))
    return np.allclose(np.asarray(a), np.asarray(b), rtol=0, atol=1e-14)


def run(repeat: int = 5, seed: int = 0):
    rng = np.random.default_rng(seed)
    results = []
    for label, (name, inputs) in _cases(rng).items():
        row = {"kernel": label}
        outs = {}
        for backend, mod in (("python", _pykernels), ("cython", _ckernels)):
            if mod is None:
                continue
            fn = getattr(mod, name)
            outs[backend] = fn(*inputs)
            row[backend] = min(timeit.repeat(lambda: fn(*inputs), number=1, repeat=repeat))
        if len(outs) == 2:
            row["agree"] = _same(outs["python"], outs["cython"])
            row["speedup"] = row["python"] / row["cython"]
        results.append(row)
    return results


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; timing the numpy fallback only", file=sys.stderr)
    rows = run(args.repeat)
    print(f"{'kernel':34s} {'numpy [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}  agree")
    for r in rows:
        cy = f"{r['cython']:11.5f}" if "cython" in r else f"{'-':>11s}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'-':>8s}"
        print(f"{r['kernel']:34s} {r['python']:11.5f} {cy} {sp}  {r.get('agree', '-')}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
    return 0 if all(r.get("agree", True) for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
