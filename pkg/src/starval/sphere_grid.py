"""Discretizations of the unit sphere carrying the normalized surface measure.

Every grid is a finite set of unit vectors with nonnegative weights summing
to one, so that ``integrate(grid, values)`` approximates the integral against
the rotation-invariant probability measure on S^{n-1}.

Monte Carlo grids draw nodes with numpy's ``PCG64`` bit generator seeded
through ``numpy.random.SeedSequence(seed)``: an ``(N, n)`` block of
``Generator.standard_normal`` samples (ziggurat method), each row divided by
its Euclidean norm. Derived streams for independent probes use
``SeedSequence(seed).spawn(k)``. Any implementation reproducing those two
numpy primitives reproduces the nodes bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

KINDS = ("circle", "latlong", "montecarlo")


def _frozen(a, dtype=np.float64):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature nodes and weights on S^{dim-1}.

    Grids are immutable; node order is part of a grid's identity.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown grid kind {self.kind!r}")
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.dim:
            raise InvalidArgument("nodes must have shape (N, dim)")
        if self.weights.shape != (self.nodes.shape[0],):
            raise InvalidArgument("one weight per node required")

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def __len__(self):
        return self.size

    def compatible(self, other: "SphereGrid") -> bool:
        """True when both grids have the same nodes in the same order."""
        if self is other:
            return True
        return (
            self.dim == other.dim
            and self.kind == other.kind
            and self.nodes.shape == other.nodes.shape
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def angles(self) -> np.ndarray:
        """Polar angle of each node (circle grids only)."""
        return np.arctan2(self.nodes[:, 1], self.nodes[:, 0]) % (2 * np.pi)

    def descriptor(self) -> dict:
        """Short reference (kind, params, seed) from which the grid can be rebuilt."""
        d = {"dim": self.dim, "kind": self.kind, "params": dict(self.params)}
        if self.seed is not None:
            d["seed"] = self.seed
        return d

    def to_dict(self) -> dict:
        d = self.descriptor()
        d["nodes"] = self.nodes.tolist()
        d["weights"] = self.weights.tolist()
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "SphereGrid":
        if "nodes" in d:
            return cls(
                dim=int(d["dim"]),
                nodes=d["nodes"],
                weights=d["weights"],
                kind=d["kind"],
                params=dict(d.get("params", {})),
                seed=d.get("seed"),
            )
        return grid_from_descriptor(d)

    @classmethod
    def from_json(cls, text: str) -> "SphereGrid":
        return cls.from_dict(json.loads(text))


def make_circle_grid(N: int) -> SphereGrid:
    """N equally spaced directions on S^1, starting at (1, 0), weights 1/N."""
    if int(N) != N or N < 2:
        raise InvalidArgument(f"circle grid needs N >= 2, got {N}")
    N = int(N)
    phi = 2.0 * np.pi * np.arange(N) / N
    nodes = np.column_stack([np.cos(phi), np.sin(phi)])
    return SphereGrid(2, nodes, np.full(N, 1.0 / N), "circle", {"N": N})


def make_latlong_grid(P: int, Q: int) -> SphereGrid:
    """Latitude/longitude grid on S^2.

    Nodes sit at polar band midpoints ``(p + 1/2) pi / P`` and azimuths
    ``2 pi q / Q``; node weights are proportional to ``sin`` of the polar
    angle and normalized to total one. Node index is ``p * Q + q``.
    """
    if int(P) != P or int(Q) != Q or P < 2 or Q < 3:
        raise InvalidArgument(f"latlong grid needs P >= 2 and Q >= 3, got {P}, {Q}")
    P, Q = int(P), int(Q)
    theta = (np.arange(P) + 0.5) * np.pi / P
    phi = 2.0 * np.pi * np.arange(Q) / Q
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    nodes = np.column_stack(
        [(np.sin(th) * np.cos(ph)).ravel(), (np.sin(th) * np.sin(ph)).ravel(), np.cos(th).ravel()]
    )
    w = np.repeat(np.sin(theta), Q)
    return SphereGrid(3, nodes, w / w.sum(), "latlong", {"P": P, "Q": Q})


def make_mc_grid(n: int, N: int, seed: int) -> SphereGrid:
    """N i.i.d. uniform directions on S^{n-1}, equal weights, deterministic in ``seed``."""
    if int(n) != n or n < 2:
        raise InvalidArgument(f"dimension must be >= 2, got {n}")
    if int(N) != N or N < 1:
        raise InvalidArgument(f"need at least one node, got {N}")
    if int(seed) != seed or seed < 0:
        raise InvalidArgument("seed must be an unsigned integer")
    n, N, seed = int(n), int(N), int(seed)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    g = rng.standard_normal((N, n))
    norms = np.linalg.norm(g, axis=1)
    # a zero row has probability zero; redraw rather than divide by 0
    while np.any(norms == 0.0):
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(g, axis=1)
    return SphereGrid(n, g / norms[:, None], np.full(N, 1.0 / N), "montecarlo",
                      {"n": n, "N": N}, seed=seed)


def grid_from_descriptor(d: dict) -> SphereGrid:
    kind = d.get("kind")
    p = d.get("params", {})
    try:
        if kind == "circle":
            return make_circle_grid(p["N"])
        if kind == "latlong":
            return make_latlong_grid(p["P"], p["Q"])
        if kind == "montecarlo":
            return make_mc_grid(p["n"], p["N"], d.get("seed", 0))
    except KeyError as exc:
        raise InvalidArgument(f"grid descriptor missing parameter {exc}") from None
    raise InvalidArgument(f"unknown grid kind {kind!r}")


def integrate(grid: SphereGrid, values) -> float:
    """Weighted sum ``sum_i w_i * values_i`` against the grid's measure."""
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (grid.size,):
        raise InvalidArgument(f"expected {grid.size} values, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidArgument("values must be finite")
    return float(np.dot(grid.weights, v))


def integrate_rows(grid: SphereGrid, rows) -> np.ndarray:
    """``integrate`` applied to each row of a 2-D array."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != grid.size:
        raise InvalidArgument(f"expected rows of length {grid.size}")
    if not np.all(np.isfinite(rows)):
        raise InvalidArgument("values must be finite")
    # row-by-row dot keeps results bit-identical to ``integrate``
    w = grid.weights
    return np.fromiter((np.dot(r, w) for r in rows), dtype=np.float64, count=rows.shape[0])


def min_node_spacing(grid: SphereGrid) -> float:
    """Smallest chordal distance between two distinct nodes."""
    from .kernels import min_chordal_distance

    if grid.kind == "circle":
        return 2.0 * math.sin(math.pi / grid.size)
    best = math.inf
    for i in range(grid.size - 1):
        d = min_chordal_distance(grid.nodes[i:i + 1], np.ascontiguousarray(grid.nodes[i + 1:]))
        best = min(best, float(d[0]))
    return best
