import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from starval import _pykernels, kernels

try:
    from starval import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python"),
            pytest.param(_ckernels, id="cython",
                         marks=pytest.mark.skipif(_ckernels is None, reason="extension not built"))]


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    if _ckernels is not None and os.environ.get("STARVAL_PURE_PYTHON", "") in ("", "0"):
        assert kernels.BACKEND == "cython"


def test_pure_python_env_switch():
    code = "import starval; print(starval.BACKEND)"
    env = dict(os.environ, STARVAL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("mod", BACKENDS)
def test_ladder_argmax_partitions_cover_enumeration(mod, rng):
    table = np.ascontiguousarray(rng.normal(size=(4, 5)))
    whole = mod.ladder_argmax(table)
    parts = [mod.ladder_argmax(table, lo, hi) for lo, hi in ((0, 2), (2, 3), (3, 5))]
    assert sum(p[2] for p in parts) == whole[2] == 5**4
    assert max(p[0] for p in parts) == whole[0]


@pytest.mark.parametrize("mod", BACKENDS)
def test_ladder_single_node_range(mod):
    table = np.array([[0.0, 3.0, 1.0, 5.0]])
    best, lev, count = mod.ladder_argmax(table, 0, 3)
    assert list(lev) == [1] and count == 3


@pytest.mark.parametrize("mod", BACKENDS)
def test_running_max_pl_crossing(mod):
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([0.0, 1.0, 0.0, 2.0])
    xo, yo = mod.running_max_pl(x, y)
    assert np.interp(2.75, xo, yo) == 1.5
    assert np.all(np.diff(yo) >= 0)


@pytest.mark.parametrize("mod", BACKENDS)
def test_min_chordal_distance(mod):
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    tg = np.array([[1.0, 0.0]])
    d = mod.min_chordal_distance(pts, tg)
    assert d.tolist() == pytest.approx([0.0, np.sqrt(2), 2.0], abs=1e-15)


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 5)),
              elements=st.floats(-10, 10, allow_nan=False)))
def test_backends_agree_on_ladder(table):
    table = np.ascontiguousarray(table)
    a, b = _ckernels.ladder_argmax(table), _pykernels.ladder_argmax(table)
    assert a[0] == b[0] and list(a[1]) == list(b[1]) and a[2] == b[2]


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=30))
def test_backends_agree_on_running_max(ys):
    x = np.arange(len(ys), dtype=np.float64) * 0.5
    y = np.asarray(ys, dtype=np.float64)
    xa, ya = _ckernels.running_max_pl(x, y)
    xb, yb = _pykernels.running_max_pl(x, y)
    assert np.array_equal(np.asarray(xa), np.asarray(xb)) and np.array_equal(np.asarray(ya), np.asarray(yb))


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
def test_backends_agree_on_distances(rng):
    pts = rng.normal(size=(300, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    tg = np.ascontiguousarray(pts[:17])
    assert np.allclose(_ckernels.min_chordal_distance(pts, tg), _pykernels.min_chordal_distance(pts, tg),
                       rtol=0, atol=1e-15)


def test_benchmark_script_runs():
    import importlib.util
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    rows = bench.run(repeat=1)
    assert len(rows) == 4 and all(r.get("agree", True) for r in rows)
