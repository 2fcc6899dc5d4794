"""Valuations on sampled star bodies and executable checks of their axioms.

Two kinds of valuation are supported: :class:`ThetaValuation`, the
rotation-invariant ``V(K) = integral theta(rho_K) dm``, and
:class:`BlackboxValuation`, an arbitrary deterministic callable on radial
functions. Checks on blackboxes are empirical; for theta valuations the
bounds they report are also certified analytically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, InvalidArgument, UnsupportedOperation
from .sphere_grid import SphereGrid, integrate, integrate_rows, make_circle_grid
from .star_body import (
    BodyGenerator,
    RadialFunction,
    intersection,
    radial_metric,
    rotate,
    rotate_sampled,
    sample,
    union,
)
from .theta import ThetaCurve, eval_theta


@dataclass(frozen=True, eq=False)
class ThetaValuation:
    curve: ThetaCurve

    @property
    def lambda_max(self) -> float:
        return self.curve.domain_max

    def evaluate(self, body: RadialFunction) -> float:
        _check_domain(self, body.values)
        return integrate(body.grid, eval_theta(self.curve, body.values))

    def evaluate_rows(self, grid: SphereGrid, rows) -> np.ndarray:
        """Valuation of many bodies given as rows of node values."""
        rows = np.asarray(rows, dtype=np.float64)
        _check_domain(self, rows)
        return integrate_rows(grid, eval_theta(self.curve, rows))

    def describe(self) -> dict:
        return {"variant": "theta_valuation", "curve": self.curve.to_dict()}


@dataclass(frozen=True, eq=False)
class BlackboxValuation:
    """A user-supplied map from radial functions to reals.

    ``func`` must be deterministic. ``grid`` is the grid the blackbox expects
    its inputs on, when it has one.
    """

    func: Callable[[RadialFunction], float]
    lambda_max: float
    grid: SphereGrid | None = None
    name: str = "blackbox"

    def evaluate(self, body: RadialFunction) -> float:
        _check_domain(self, body.values)
        return float(self.func(body))

    def evaluate_rows(self, grid: SphereGrid, rows) -> np.ndarray:
        return np.array([self.evaluate(RadialFunction(grid, r)) for r in np.atleast_2d(rows)])

    def describe(self) -> dict:
        return {"variant": "blackbox", "name": self.name, "lambda_max": self.lambda_max}


ValuationSpec = ThetaValuation | BlackboxValuation


def _check_domain(spec, values):
    top = float(np.max(values, initial=0.0))
    if top > spec.lambda_max:
        raise DomainError(f"body reaches {top}, valuation is defined up to {spec.lambda_max}")


def evaluate(spec: ValuationSpec, body: RadialFunction) -> float:
    """V(K) for a sampled body."""
    return spec.evaluate(body)


def valuation_residual(spec: ValuationSpec, K: RadialFunction, L: RadialFunction) -> float:
    """``V(K u L) + V(K n L) - V(K) - V(L)``; zero for a valuation."""
    KuL = union(K, L)
    KnL = intersection(K, L)
    return spec.evaluate(KuL) + spec.evaluate(KnL) - spec.evaluate(K) - spec.evaluate(L)


def _default_grid(spec, grid):
    if grid is not None:
        return grid
    if isinstance(spec, BlackboxValuation) and spec.grid is not None:
        return spec.grid
    return make_circle_grid(16)


def extract_theta(spec: ValuationSpec, lam_samples, grid: SphereGrid | None = None) -> ThetaCurve:
    """Recover the profile ``theta(lam) = V(lam * ball)`` as a piecewise-linear curve."""
    lam = np.asarray(lam_samples, dtype=np.float64)
    if lam.ndim != 1 or lam.size < 2:
        raise InvalidArgument("need at least two lambda samples")
    if lam[0] != 0.0 or np.any(np.diff(lam) <= 0):
        raise InvalidArgument("lambda samples must start at 0 and increase strictly")
    if lam[-1] > spec.lambda_max:
        raise DomainError(f"lambda sample {lam[-1]} beyond {spec.lambda_max}")
    grid = _default_grid(spec, grid)
    ys = [spec.evaluate(RadialFunction.constant(grid, v)) for v in lam]
    return ThetaCurve.piecewise_linear(lam, ys)


def check_rotational_invariance(spec: ValuationSpec, gen: BodyGenerator, rotations, grid: SphereGrid) -> float:
    """Max ``|V(K) - V(R K)|`` over the given rotations.

    A rotation is either an orthogonal matrix, applied exactly through the
    generator, or an integer number of grid steps on a circle grid, applied
    as an index shift of the sampled body.
    """
    base = sample(gen, grid)
    v0 = spec.evaluate(base)
    worst = 0.0
    for R in rotations:
        if isinstance(R, (int, np.integer)):
            if grid.kind != "circle":
                raise UnsupportedOperation("grid-step rotations need a circle grid")
            moved = rotate_sampled(base, int(R))
        else:
            R = np.asarray(R, dtype=np.float64)
            if R.shape != (grid.dim, grid.dim):
                raise InvalidArgument("rotation dimension does not match the grid")
            moved = sample(rotate(gen, R), grid)
        worst = max(worst, abs(v0 - spec.evaluate(moved)))
    return worst


@dataclass
class BoundednessReport:
    lam: float
    trials: int
    seed: int
    empirical: float
    analytic: float | None = None

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "trials": self.trials, "seed": self.seed,
                "empirical": self.empirical, "analytic": self.analytic}


def _rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def random_bodies(grid: SphereGrid, count: int, lam: float, seed: int, model: str = "rough") -> np.ndarray:
    """``count`` random bodies inside ``lam * ball`` as rows of node values.

    ``rough`` draws node values i.i.d. uniform on ``[0, lam]``. ``smooth``
    restricts a random sum of four plane waves ``cos(k <u, t> + phase)`` to
    the grid and rescales it affinely onto ``[0, s * lam]`` with ``s``
    uniform on ``(0, 1]``.
    """
    rng = _rng(seed)
    count = int(count)
    if model == "rough":
        return rng.uniform(0.0, lam, size=(count, grid.size))
    if model != "smooth":
        raise InvalidArgument(f"unknown body model {model!r}")
    out = np.empty((count, grid.size))
    for r in range(count):
        u = rng.standard_normal((4, grid.dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        k = rng.integers(1, 4, size=4)
        phase = rng.uniform(0.0, 2 * np.pi, size=4)
        amp = rng.uniform(0.0, 1.0, size=4)
        h = np.cos((grid.nodes @ u.T) * k + phase) @ amp
        span = h.max() - h.min()
        scale = lam * (1.0 - rng.uniform(0.0, 1.0))
        out[r] = (h - h.min()) / span * scale if span > 0 else scale
    return out


def check_bounded_on_bounded(spec: ValuationSpec, lam: float, trials: int, seed: int = 0,
                             grid: SphereGrid | None = None, model: str = "rough") -> BoundednessReport:
    """Empirical ``max |V|`` over random bodies inside ``lam * ball``.

    The default grid for theta valuations has three nodes: on coarse grids
    random rough bodies come close to the extreme bodies, so the empirical
    bound approaches the analytic one ``max |theta|`` on ``[0, lam]``.
    ``model`` selects the body family (see :func:`random_bodies`).
    """
    if lam < 0 or lam > spec.lambda_max:
        raise DomainError(f"lambda must lie in [0, {spec.lambda_max}]")
    if grid is None:
        grid = spec.grid if isinstance(spec, BlackboxValuation) and spec.grid else make_circle_grid(3)
    rows = random_bodies(grid, trials, lam, seed, model)
    emp = float(np.max(np.abs(spec.evaluate_rows(grid, rows)))) if trials else 0.0
    analytic = spec.curve.sup_abs(lam) if isinstance(spec, ThetaValuation) else None
    return BoundednessReport(float(lam), int(trials), int(seed), emp, analytic)


def check_continuity(spec: ValuationSpec, body: RadialFunction, deltas, probes: int, seed: int = 0):
    """Table of ``(delta, max |V(K) - V(K')|)`` over random ``K'`` with ``delta(K, K') <= delta``.

    Each probe draws from its own stream ``SeedSequence(seed).spawn(probes)``
    so the table does not depend on evaluation order. Perturbed values are
    clamped to ``[0, lambda_max]``, which can only shrink the distance.
    """
    # same summation path as the probes, so delta = 0 gives exactly 0
    v0 = float(spec.evaluate_rows(body.grid, body.values[None, :])[0])
    streams = np.random.SeedSequence(int(seed)).spawn(int(probes))
    noise = np.array([np.random.Generator(np.random.PCG64(s)).uniform(-1.0, 1.0, body.grid.size)
                      for s in streams]).reshape(int(probes), body.grid.size)
    table = []
    for d in deltas:
        d = float(d)
        if d < 0:
            raise InvalidArgument("deltas must be nonnegative")
        rows = np.clip(body.values + d * noise, 0.0, spec.lambda_max)
        if probes == 0:
            table.append((d, 0.0))
            continue
        dev = np.abs(spec.evaluate_rows(body.grid, rows) - v0)
        table.append((d, float(dev.max())))
    return table


def max_perturbation(body: RadialFunction, rows) -> float:
    """Largest radial distance between ``body`` and any row (for audits)."""
    return max((radial_metric(body, RadialFunction(body.grid, r)) for r in rows), default=0.0)
