import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starval import DomainError, InvalidArgument, ThetaCurve, decompose_theta, eval_theta, running_max
from starval.theta import decomposition_table, table_to_csv

TWO_PI = 2 * math.pi


def dense_prefix_max(curve, x):
    """Oracle: prefix max of theta sampled on ``x``."""
    return np.maximum.accumulate(curve._raw(x))


def test_eval_examples():
    assert eval_theta(ThetaCurve.power(2, 5), 3) == 9
    pl = ThetaCurve.piecewise_linear([0, 1, 2], [0, 1, 0])
    assert eval_theta(pl, 1.5) == 0.5
    assert eval_theta(ThetaCurve.sine(1, 1, 4), math.pi / 2) == 1.0
    assert eval_theta(ThetaCurve.polynomial([1, -2, 1], 3), 2.0) == 1.0


@pytest.mark.parametrize("lam", [-1e-9, 5.0000001, math.nan])
def test_eval_domain(lam):
    with pytest.raises(DomainError):
        eval_theta(ThetaCurve.power(1, 5), lam)


def test_curve_validation():
    with pytest.raises(InvalidArgument):
        ThetaCurve.piecewise_linear([0.1, 1], [0, 0])
    with pytest.raises(InvalidArgument):
        ThetaCurve.piecewise_linear([0, 1, 1], [0, 0, 0])
    with pytest.raises(InvalidArgument):
        ThetaCurve.power(0, 1)
    with pytest.raises(InvalidArgument):
        ThetaCurve.sine(1, 1, -2)
    with pytest.raises(InvalidArgument):
        ThetaCurve("cosine", 1.0, {})


def test_running_max_identity_and_negative():
    up = running_max(ThetaCurve.power(1, 3), 1001)
    x = np.linspace(0, 3, 77)
    np.testing.assert_allclose(up(x), x, atol=1e-15)
    down = running_max(ThetaCurve.power(1, 3, coef=-1), 1001)
    assert np.all(down(x) == 0.0)


def test_running_max_sine_analytic():
    M = running_max(ThetaCurve.sine(1, 1, TWO_PI), 1_000_000)
    x = np.linspace(0, TWO_PI, 200_003)
    exact = np.where(x <= math.pi / 2, np.sin(x), 1.0)
    assert np.max(np.abs(M(x) - exact)) <= 1e-9


def test_running_max_sine_dense_oracle():
    curve = ThetaCurve.sine(1, 1, TWO_PI)
    M = running_max(curve, 1_000_000)
    x = np.linspace(0, TWO_PI, 3_000_001)
    assert np.max(np.abs(M(x) - dense_prefix_max(curve, x))) <= 1e-9


def test_running_max_pl_inserts_crossings():
    pl = ThetaCurve.piecewise_linear([0, 1, 2, 3], [0, 1, 0, 2])
    M = running_max(pl, 2)
    assert M(2.75) == 1.5 and M(2.5) == 1.0 and M(1.5) == 1.0
    x = np.linspace(0, 3, 30_001)
    assert np.max(np.abs(M(x) - dense_prefix_max(pl, x))) <= 1e-12


def test_running_max_pl_exact_random(rng):
    for _ in range(20):
        xs = np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 1.0, 12))])
        pl = ThetaCurve.piecewise_linear(xs, rng.normal(size=13))
        M = running_max(pl, 2)
        x = np.unique(np.concatenate([np.linspace(0, xs[-1], 20_001), xs]))
        assert np.max(np.abs(M(x) - dense_prefix_max(pl, x))) <= 1e-12
        assert np.all(np.diff(M.nodes()[1]) >= 0)


def test_running_max_refines_returning_crossings():
    # x(x-1)(x-3): bump, dip, then climbs back through the old record
    poly = ThetaCurve.polynomial([0, 3, -4, 1], 4.0)
    M = running_max(poly, 4001)
    xs, ms = M.nodes()
    peak_x = (4 - math.sqrt(7)) / 3
    peak = peak_x * (peak_x - 1) * (peak_x - 3)
    # the true peak and the exact return crossing are nodes of the result
    # a flat maximum is located only to ~sqrt(eps); its value is exact
    assert np.min(np.abs(xs - peak_x)) < 1e-7
    assert np.max(ms[xs < 3]) == pytest.approx(peak, abs=1e-14)
    plateau_end = xs[(ms == ms[xs < 3].max()) & (xs > 3)].max()
    assert abs(poly(plateau_end) - peak) < 1e-12
    # between nodes only interpolation error remains: h^2/8 * max|theta''|
    h = 4.0 / 4000
    xd = np.linspace(0, 4, 2_000_001)
    assert np.max(np.abs(M(xd) - dense_prefix_max(poly, xd))) <= h**2 / 8 * 16 + 1e-12


def test_resolution_validation():
    with pytest.raises(InvalidArgument):
        running_max(ThetaCurve.power(1, 1), 1)


def test_decompose_examples():
    lam = np.linspace(0, 2, 41)
    p, m, off = decompose_theta(ThetaCurve.power(1, 2), 1001)
    assert off == 0.0
    np.testing.assert_allclose(p(lam), lam, atol=1e-15)
    assert np.all(m(lam) == 0.0)
    p, m, off = decompose_theta(ThetaCurve.power(1, 2, coef=-1), 1001)
    assert np.all(p(lam) == 0.0)
    np.testing.assert_allclose(m(lam), lam, atol=1e-15)


def test_decompose_sine():
    p, m, off = decompose_theta(ThetaCurve.sine(1, 1, TWO_PI), 1_000_000)
    x = np.linspace(0, TWO_PI, 100_001)
    expected_minus = np.where(x <= math.pi / 2, 0.0, 1 - np.sin(x))
    assert np.max(np.abs(m(x) - expected_minus)) <= 1e-9
    assert p(0.0) == 0.0 and m(0.0) == 0.0


def test_decompose_offset():
    curve = ThetaCurve.polynomial([2.0, -1.0, 0.5], 4.0)
    p, m, off = decompose_theta(curve, 20_001)
    assert off == 2.0
    x = np.linspace(0, 4, 5001)
    assert np.max(np.abs(p(x) - m(x) + off - curve(x))) <= 1e-6
    assert p(0.0) == 0.0 and m(0.0) == 0.0


def test_decompose_idempotent_on_monotone():
    pl = ThetaCurve.piecewise_linear([0, 1, 2, 5], [0, 0.5, 0.5, 3])
    p, m, off = decompose_theta(pl, 2)
    assert off == 0.0
    assert np.array_equal(p.nodes()[0], pl.nodes()[0]) and np.array_equal(p.nodes()[1], pl.nodes()[1])
    assert np.all(m.nodes()[1] == 0.0)


pl_curves = st.lists(st.tuples(st.floats(0.01, 2.0), st.floats(-5, 5)), min_size=1, max_size=15).map(
    lambda pts: ThetaCurve.piecewise_linear(
        np.concatenate([[0.0], np.cumsum([d for d, _ in pts])]),
        np.concatenate([[pts[0][1] * 0.3], [y for _, y in pts]])))


@settings(max_examples=150, deadline=None)
@given(pl_curves)
def test_decomposition_invariants(curve):
    p, m, off = decompose_theta(curve, 2)
    x = np.unique(np.concatenate([np.linspace(0, curve.domain_max, 2001), p.nodes()[0]]))
    tp, tm, t = p(x), m(x), curve(x)
    scale = 1 + np.abs(t).max()
    assert tp.min() >= -1e-12 * scale and tm.min() >= -1e-12 * scale
    assert np.max(np.abs(tp - tm - (t - off))) <= 1e-12 * scale
    assert np.all(np.diff(tp) >= -1e-12 * scale)
    assert p(0.0) == 0.0 and m(0.0) == 0.0
    # minimal nondecreasing majorant: equals the dense prefix max
    assert np.max(np.abs(tp - (np.maximum.accumulate(t) - off))) <= 1e-12 * scale


def test_sup_abs_and_lipschitz():
    assert ThetaCurve.power(2, 3).sup_abs(2) == 4
    assert ThetaCurve.sine(1, 1, TWO_PI).sup_abs(2) == 1.0
    assert abs(ThetaCurve.sine(1, 1, TWO_PI).sup_abs(1.0) - math.sin(1.0)) < 1e-15
    poly = ThetaCurve.polynomial([0, 3, -4, 1], 4.0)
    x = np.linspace(0, 4, 400_001)
    assert abs(poly.sup_abs() - np.abs(poly(x)).max()) < 1e-9
    assert abs(poly.lipschitz() - np.abs(3 - 8 * x + 3 * x**2).max()) < 1e-9
    assert ThetaCurve.power(2, 3).lipschitz() == 6
    assert ThetaCurve.power(0.5, 3).lipschitz() == math.inf
    assert ThetaCurve.sine(2, 3, 1).lipschitz() == 6
    assert ThetaCurve.piecewise_linear([0, 1, 2], [0, 2, 1]).lipschitz() == 2


def test_json_round_trip():
    for c in (ThetaCurve.power(2, 3), ThetaCurve.sine(1, 2, 4), ThetaCurve.piecewise_linear([0, 1], [1, 2])):
        back = ThetaCurve.from_dict(c.to_dict())
        x = np.linspace(0, c.domain_max, 11)
        assert np.array_equal(back(x), c(x))


def test_table_csv():
    rows = decomposition_table(ThetaCurve.sine(1, 1, TWO_PI), 0.5, 10_001)
    assert rows[0].tolist() == [0.0, 0.0, 0.0, 0.0]
    assert rows[-1][0] == TWO_PI
    text = table_to_csv(rows)
    assert text.splitlines()[0] == "lambda,theta,theta_plus,theta_minus"
