"""Node sets, outer parallel bands and max-type partitions of unity on grids.

Distances are chordal (Euclidean in R^n), never geodesic. A set on a grid
is its member node indices; spherical caps and finite point sets also carry
a closed form so that distances to them are exact rather than measured to
the nearest member node.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .kernels import min_chordal_distance
from .sphere_grid import SphereGrid
from .star_body import RadialFunction


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Subset of a grid's nodes, with an optional closed-form description.

    ``descriptor`` is ``None``, ``("cap", center, alpha)`` for the open cap
    of directions at angle ``< alpha`` from ``center``, or
    ``("points", array)`` for a finite set of unit vectors.
    """

    grid: SphereGrid
    indices: np.ndarray
    descriptor: tuple | None = None

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.intp))
        if idx.size and (idx[0] < 0 or idx[-1] >= self.grid.size):
            raise InvalidArgument("node index out of range for the grid")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_indices(cls, grid, indices):
        return cls(grid, indices)

    @classmethod
    def cap(cls, grid: SphereGrid, center, alpha: float) -> "NodeSet":
        c = np.asarray(center, dtype=np.float64)
        c = c / np.linalg.norm(c)
        ang = _angles_to(grid, c)
        return cls(grid, np.nonzero(ang < alpha)[0], ("cap", c, float(alpha)))

    @classmethod
    def arc(cls, grid: SphereGrid, center_angle: float, half_width: float) -> "NodeSet":
        """Open arc of S^1 centred at ``center_angle`` (a cap on the circle)."""
        return cls.cap(grid, [np.cos(center_angle), np.sin(center_angle)], half_width)

    @classmethod
    def points(cls, grid: SphereGrid, pts) -> "NodeSet":
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        hit = min_chordal_distance(np.ascontiguousarray(grid.nodes), np.ascontiguousarray(pts)) == 0.0
        return cls(grid, np.nonzero(hit)[0], ("points", pts))

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.grid.size, dtype=bool)
        m[self.indices] = True
        return m

    def __len__(self):
        return self.indices.size

    def measure(self) -> float:
        return float(self.grid.weights[self.indices].sum())

    def to_dict(self) -> dict:
        d = {"indices": self.indices.tolist()}
        if self.descriptor is not None:
            kind = self.descriptor[0]
            if kind == "cap":
                d["cap"] = {"center": self.descriptor[1].tolist(), "alpha": self.descriptor[2]}
            else:
                d["points"] = self.descriptor[1].tolist()
        return d


@dataclass(frozen=True)
class BandSpec:
    base: NodeSet
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise InvalidArgument("band width must be positive")


def _angles_to(grid, c):
    return np.arccos(np.clip(grid.nodes @ c, -1.0, 1.0))


def distances_to_set(grid: SphereGrid, A: NodeSet) -> np.ndarray:
    """Chordal distance ``d(t, A)`` for every node ``t``."""
    if A.descriptor is not None and A.descriptor[0] == "cap":
        _, c, alpha = A.descriptor
        gap = _angles_to(grid, c) - alpha
        return np.where(gap > 0, 2.0 * np.sin(np.maximum(gap, 0.0) / 2.0), 0.0)
    if A.descriptor is not None and A.descriptor[0] == "points":
        targets = A.descriptor[1]
    else:
        if len(A) == 0:
            raise InvalidArgument("distance to an empty set is undefined")
        targets = grid.nodes[A.indices]
    d = min_chordal_distance(np.ascontiguousarray(grid.nodes), np.ascontiguousarray(targets))
    d[A.indices] = 0.0
    return d


def distance_to_set(grid: SphereGrid, A: NodeSet, t: int) -> float:
    """Chordal distance from node ``t`` to ``A``."""
    if A.descriptor is None and len(A) == 0:
        raise InvalidArgument("distance to an empty set is undefined")
    if not 0 <= t < grid.size:
        raise InvalidArgument("node index out of range")
    return float(distances_to_set(grid, A)[t])


def outer_band(grid: SphereGrid, spec: BandSpec) -> NodeSet:
    """Nodes with ``0 < d(t, A) < width``."""
    d = distances_to_set(grid, spec.base)
    return NodeSet(grid, np.nonzero((d > 0) & (d < spec.width))[0])


def _complement_distances(grid: SphereGrid, G: NodeSet) -> np.ndarray:
    """``d(t, G^c)``; ``inf`` when the complement has no node."""
    if G.descriptor is not None and G.descriptor[0] == "cap":
        _, c, alpha = G.descriptor
        gap = alpha - _angles_to(grid, c)
        return np.where(gap > 0, 2.0 * np.sin(np.minimum(np.maximum(gap, 0.0), np.pi) / 2.0), 0.0)
    out_idx = np.nonzero(~G.mask)[0]
    if out_idx.size == 0:
        return np.full(grid.size, np.inf)
    d = min_chordal_distance(np.ascontiguousarray(grid.nodes), np.ascontiguousarray(grid.nodes[out_idx]))
    d[out_idx] = 0.0
    return d


def partition_of_unity(grid: SphereGrid, covers) -> np.ndarray:
    """Max-type partition of unity subordinate to finitely many open sets.

    Returns an array of shape ``(len(covers), N)`` with
    ``phi_i(t) = d(t, G_i^c) / max_j d(t, G_j^c)`` on the union ``G`` and 0
    elsewhere. At each node of ``G`` the maximizing cover gets exactly 1.
    Covers whose complement contains no node get 1 wherever the max is
    infinite.
    """
    covers = list(covers)
    if not covers or all(len(G) == 0 for G in covers):
        raise InvalidArgument("need at least one nonempty cover")
    D = np.vstack([_complement_distances(grid, G) for G in covers])
    top = D.max(axis=0)
    phi = np.zeros_like(D)
    inf_cols = np.isinf(top)
    fin = ~inf_cols & (top > 0)
    phi[:, fin] = D[:, fin] / top[fin]
    phi[:, inf_cols] = np.isinf(D[:, inf_cols]).astype(float)
    return phi


def split_function(f: RadialFunction, partitions) -> list[RadialFunction]:
    """Pieces ``phi_i * f``; their node-wise max is ``f``."""
    phi = np.asarray(partitions, dtype=np.float64)
    if phi.ndim != 2 or phi.shape[1] != f.grid.size:
        raise InvalidArgument("partition does not match the body's grid")
    covered = phi.max(axis=0) > 0
    if np.any((f.values != 0) & ~covered):
        raise InvalidArgument("support of f is not contained in the union of the covers")
    return [RadialFunction(f.grid, p * f.values) for p in phi]


def band_bump(grid: SphereGrid, spec: BandSpec, height: float) -> RadialFunction:
    """Tent of height ``height`` across the band, peaking at ``d = width / 2``."""
    if height < 0:
        raise InvalidArgument("height must be >= 0")
    d = distances_to_set(grid, spec.base)
    w = spec.width
    inside = (d > 0) & (d < w)
    tent = np.maximum(0.0, 1.0 - np.abs(2.0 * d / w - 1.0))
    return RadialFunction(grid, np.where(inside, height * tent, 0.0))


@dataclass
class RimRow:
    omega: float
    sup_abs_V: float
    band_measure: float
    envelope: float | None = None


def rim_decay_profile(V, A: NodeSet, lam: float, omegas, random_bumps: int = 16,
                      seed: int = 0) -> list[RimRow]:
    """``sup |V(f)|`` over bodies supported in the band ``A_omega`` with ``||f|| <= lam``.

    The family per omega is the canonical tent plus ``random_bumps`` bodies
    whose band values are i.i.d. uniform on ``[0, lam]``. For theta
    valuations each row also carries the envelope
    ``max|theta| m(A_omega) + |theta(0)| (1 - m(A_omega))``.
    """
    from .valuation import ThetaValuation

    grid = A.grid
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    rows = []
    for w in omegas:
        band = outer_band(grid, BandSpec(A, float(w)))
        m = band.measure()
        family = [band_bump(grid, BandSpec(A, float(w)), lam).values]
        mask = band.mask
        for _ in range(int(random_bumps)):
            family.append(np.where(mask, rng.uniform(0.0, lam, grid.size), 0.0))
        vals = V.evaluate_rows(grid, np.array(family))
        env = None
        if isinstance(V, ThetaValuation):
            c = V.curve
            env = c.sup_abs(lam) * m + abs(float(c(0.0))) * (1.0 - m)
        rows.append(RimRow(float(w), float(np.max(np.abs(vals))), m, env))
    return rows


def rim_table_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega", "sup_abs_V", "band_measure"])
    for r in rows:
        w.writerow([repr(r.omega), repr(r.sup_abs_V), repr(r.band_measure)])
    return buf.getvalue()
