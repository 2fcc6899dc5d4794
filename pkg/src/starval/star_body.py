"""Star bodies as sampled radial functions, plus closed-form body generators.

A star body K is identified with its radial function
``rho_K(t) = sup{c >= 0 : c t in K}`` restricted to the nodes of a
:class:`~starval.sphere_grid.SphereGrid`. Union and intersection of bodies
are the pointwise max and min of radial functions, and the radial metric is
the sup-norm distance.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GridMismatch,
    InvalidArgument,
    NotAStarSet,
    UnboundedBody,
    UnsupportedOperation,
)
from .sphere_grid import SphereGrid, grid_from_descriptor

ORTHO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Nonnegative finite values of a radial function, one per grid node."""

    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (self.grid.size,):
            raise InvalidArgument(f"expected {self.grid.size} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("radial function values must be finite")
        if np.any(v < 0):
            raise InvalidArgument("radial function values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def origin(cls, grid: SphereGrid) -> "RadialFunction":
        """The body {0}."""
        return cls(grid, np.zeros(grid.size))

    @classmethod
    def constant(cls, grid: SphereGrid, r: float) -> "RadialFunction":
        return cls(grid, np.full(grid.size, float(r)))

    def sup_norm(self) -> float:
        return float(self.values.max(initial=0.0))

    def __eq__(self, other):
        if not isinstance(other, RadialFunction):
            return NotImplemented
        return self.grid.compatible(other.grid) and np.array_equal(self.values, other.values)

    __hash__ = None

    def to_dict(self) -> dict:
        return {"grid_ref": self.grid.descriptor(), "values": self.values.tolist()}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict, grid: SphereGrid | None = None) -> "RadialFunction":
        if "generator" in d:
            if grid is None:
                raise InvalidArgument("a grid is needed to sample a generator body")
            return sample(BodyGenerator.from_dict(d["generator"]), grid)
        if grid is None:
            grid = grid_from_descriptor(d["grid_ref"])
        return cls(grid, d["values"])

    def to_csv(self) -> str:
        """Rows of (angle, value) on circle grids, (node, value) otherwise."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.grid.kind == "circle":
            w.writerow(["angle", "value"])
            for a, v in zip(self.grid.angles(), self.values):
                w.writerow([repr(float(a)), repr(float(v))])
        else:
            w.writerow(["node", "value"])
            for i, v in enumerate(self.values):
                w.writerow([i, repr(float(v))])
        return buf.getvalue()


def _check_orthogonal(R, dim=None):
    R = np.array(R, dtype=np.float64)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise InvalidArgument("rotation must be a square matrix")
    if dim is not None and R.shape[0] != dim:
        raise InvalidArgument(f"rotation is {R.shape[0]}x{R.shape[0]}, body dimension is {dim}")
    if np.max(np.abs(R.T @ R - np.eye(R.shape[0]))) > ORTHO_TOL:
        raise InvalidArgument("rotation matrix is not orthogonal within 1e-10")
    R.setflags(write=False)
    return R


def rotation_2d(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class BodyGenerator:
    """Closed-form radial function, optionally rotated.

    ``kind`` is one of ``origin``, ``ball``, ``ellipsoid`` or ``trigblob``.
    ``params`` holds ``r`` (ball), ``axes`` (ellipsoid), or ``base``,
    ``terms`` and ``floor`` (trigblob). The generator evaluated at a unit
    vector ``t`` returns ``rho(R^{-1} t)`` where ``R`` is ``rotation``.

    trigblob in the plane is ``base + sum a cos(k phi) + b sin(k phi)`` over
    terms ``(k, a, b)``; on S^2 each term ``(l, m, a, b)`` contributes
    ``cos(l theta) sin(theta)^m (a cos(m phi) + b sin(m phi))`` with
    ``theta`` the polar angle, which keeps every term continuous at the
    poles. Both are clamped below at ``floor``.
    """

    kind: str
    dim: int
    params: dict = field(default_factory=dict)
    rotation: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidArgument("dimension must be >= 2")
        if self.rotation is None:
            object.__setattr__(self, "rotation", _check_orthogonal(np.eye(self.dim)))
        else:
            object.__setattr__(self, "rotation", _check_orthogonal(self.rotation, self.dim))
        if self.kind == "ball":
            if not self.params.get("r", -1) >= 0:
                raise InvalidArgument("ball radius must be >= 0")
        elif self.kind == "ellipsoid":
            axes = np.asarray(self.params.get("axes", ()), dtype=float)
            if axes.shape != (self.dim,) or np.any(axes <= 0):
                raise InvalidArgument(f"ellipsoid needs {self.dim} positive semi-axes")
        elif self.kind == "trigblob":
            if self.dim not in (2, 3):
                raise InvalidArgument("trigblob is defined for n = 2 and n = 3")
            if self.params.get("floor", 0.0) < 0:
                raise InvalidArgument("trigblob floor must be >= 0")
            width = 3 if self.dim == 2 else 4
            for term in self.params.get("terms", ()):
                if len(term) != width:
                    raise InvalidArgument(f"trigblob terms need {width} entries in n={self.dim}")
        elif self.kind != "origin":
            raise InvalidArgument(f"unknown body kind {self.kind!r}")

    @classmethod
    def origin(cls, dim=2):
        return cls("origin", dim)

    @classmethod
    def ball(cls, r, dim=2):
        return cls("ball", dim, {"r": float(r)})

    @classmethod
    def ellipsoid(cls, *axes):
        return cls("ellipsoid", len(axes), {"axes": [float(a) for a in axes]})

    @classmethod
    def trigblob(cls, base, terms, floor=0.0, dim=2):
        return cls("trigblob", dim, {"base": float(base),
                                     "terms": [list(map(float, t)) for t in terms],
                                     "floor": float(floor)})

    def _unrotated(self, t: np.ndarray) -> np.ndarray:
        m = t.shape[0]
        if self.kind == "origin":
            return np.zeros(m)
        if self.kind == "ball":
            return np.full(m, self.params["r"])
        if self.kind == "ellipsoid":
            a = np.asarray(self.params["axes"], dtype=float)
            return 1.0 / np.sqrt(((t / a) ** 2).sum(axis=1))
        # trigblob
        val = np.full(m, self.params.get("base", 0.0))
        if self.dim == 2:
            phi = np.arctan2(t[:, 1], t[:, 0])
            for k, a, b in self.params.get("terms", ()):
                val += a * np.cos(k * phi) + b * np.sin(k * phi)
        else:
            theta = np.arccos(np.clip(t[:, 2], -1.0, 1.0))
            phi = np.arctan2(t[:, 1], t[:, 0])
            st = np.sin(theta)
            for l, mm, a, b in self.params.get("terms", ()):
                val += np.cos(l * theta) * st ** mm * (a * np.cos(mm * phi) + b * np.sin(mm * phi))
        return np.maximum(val, self.params.get("floor", 0.0))

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_2d(np.asarray(t, dtype=np.float64))
        if t.shape[1] != self.dim:
            raise InvalidArgument("direction dimension does not match the generator")
        # rows of t @ R are (R^T t)^T = (R^{-1} t)^T
        return self._unrotated(t @ self.rotation)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dim": self.dim, "params": self.params}
        if not np.array_equal(self.rotation, np.eye(self.dim)):
            d["rotation"] = self.rotation.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BodyGenerator":
        return cls(d["kind"], int(d["dim"]), dict(d.get("params", {})), d.get("rotation"))


def sample(gen: BodyGenerator, grid: SphereGrid) -> RadialFunction:
    """Evaluate a generator at every grid node."""
    if gen.dim != grid.dim:
        raise InvalidArgument(f"generator dimension {gen.dim} != grid dimension {grid.dim}")
    return RadialFunction(grid, gen(grid.nodes))


def _same_grid(f: RadialFunction, g: RadialFunction):
    if not f.grid.compatible(g.grid):
        raise GridMismatch("radial functions live on different grids")


def union(f: RadialFunction, g: RadialFunction) -> RadialFunction:
    _same_grid(f, g)
    return RadialFunction(f.grid, np.maximum(f.values, g.values))


def intersection(f: RadialFunction, g: RadialFunction) -> RadialFunction:
    _same_grid(f, g)
    return RadialFunction(f.grid, np.minimum(f.values, g.values))


def radial_sum(f: RadialFunction, g: RadialFunction) -> RadialFunction:
    _same_grid(f, g)
    return RadialFunction(f.grid, f.values + g.values)


def radial_metric(f: RadialFunction, g: RadialFunction) -> float:
    """Sup-norm distance between radial functions on the grid."""
    _same_grid(f, g)
    return float(np.max(np.abs(f.values - g.values)))


def radial_from_membership(oracle, grid: SphereGrid, rmax: float, tol: float) -> RadialFunction:
    """Recover a radial function from a membership predicate by bisection.

    For every node ``t`` the interval ``[0, rmax]`` is bisected until its
    width is at most ``tol``. The lower end, which is always a member, is
    returned, so results never overshoot the true radial function.
    """
    if rmax <= 0 or tol <= 0:
        raise InvalidArgument("rmax and tol must be positive")
    if not oracle(np.zeros(grid.dim)):
        raise NotAStarSet("membership oracle rejects the origin")
    out = np.empty(grid.size)
    for i, t in enumerate(grid.nodes):
        if oracle(rmax * t):
            raise UnboundedBody(f"oracle accepts rmax * t at node {i}; increase rmax")
        lo, hi = 0.0, float(rmax)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if oracle(mid * t):
                lo = mid
            else:
                hi = mid
        out[i] = lo
    return RadialFunction(grid, out)


def rotate(gen: BodyGenerator, R) -> BodyGenerator:
    """Generator for the rotated body R K; rotations compose as ``R @ old``."""
    R = _check_orthogonal(R, gen.dim)
    return BodyGenerator(gen.kind, gen.dim, gen.params, R @ gen.rotation)


def rotate_sampled(f: RadialFunction, k: int) -> RadialFunction:
    """Rotate a body sampled on a circle grid by ``k`` grid steps (exact index shift)."""
    if f.grid.kind != "circle":
        raise UnsupportedOperation("exact sampled rotation needs a circle grid")
    return RadialFunction(f.grid, np.roll(f.values, int(k)))
