"""Unit-square geometry, the connectivity radius, and the neighbor index."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

DEFAULT_C0 = 8.0 / math.pi


class Point(NamedTuple):
    x: float
    y: float


def transmission_radius(n: int, c0: float = DEFAULT_C0) -> float:
    """Return ``sqrt(c0 * ln(n) / n)``, the RGG connectivity radius."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not c0 > 0:
        raise ValueError(f"c0 must be positive, got {c0}")
    return math.sqrt(c0 * math.log(n) / n)


@dataclass(frozen=True)
class NetworkConfig:
    """Node count, connectivity constant and radius of one network.

    ``r`` is derived from ``n`` and ``c0`` unless given explicitly.
    """

    n: int
    c0: float = DEFAULT_C0
    r: float | None = None
    master_seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.c0 > 0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if self.r is None:
            object.__setattr__(self, "r", transmission_radius(self.n, self.c0))
        if not 0 < self.r < 1:
            raise ValueError(f"r must lie in (0, 1), got {self.r}")
        if self.n * math.pi * self.r**2 < 1:
            raise ValueError("n * pi * r^2 < 1: expected neighborhood is empty")

    @property
    def expected_degree(self) -> float:
        """Mean neighbor count of a node, boundary losses included."""
        return (self.n - 1) * pair_contact_probability(self.r)

    @property
    def contact_probability(self) -> float:
        """The per-neighbor contact constant P(r), the reciprocal of the mean degree."""
        return 1.0 / self.expected_degree


def pair_contact_probability(r: float) -> float:
    """Probability that two independent uniform points of the unit square lie within ``r``.

    Exact for ``0 <= r <= 1``: ``pi r^2 - 8 r^3 / 3 + r^4 / 2``.  The first
    term alone is the edge-free value.
    """
    if not 0 <= r <= 1:
        raise ValueError(f"r must lie in [0, 1], got {r}")
    return math.pi * r**2 - 8.0 * r**3 / 3.0 + r**4 / 2.0


def uniform_point(rng: np.random.Generator) -> Point:
    """Uniform point on the unit square; consumes exactly two draws (x then y)."""
    x, y = rng.random(2)
    return Point(float(x), float(y))


def uniform_points(n: int, rng: np.random.Generator) -> np.ndarray:
    """``(n, 2)`` uniform positions, drawn row-major (x0, y0, x1, y1, ...)."""
    return rng.random((n, 2))


class SpatialIndex:
    """Fixed-radius neighbor structure over one snapshot of positions.

    Built once per snapshot and treated as immutable.  ``pairs`` holds every
    unordered pair at distance strictly below ``r`` as ``(i, j)`` rows with
    ``i < j``, sorted lexicographically.  Per-node neighbor lists (CSR form)
    are derived lazily, since conductance estimation only needs the pairs.
    """

    def __init__(self, positions: np.ndarray, r: float, generation: int = 0):
        positions = np.asarray(positions, dtype=float)
        if positions.ndim != 2 or positions.shape[1] != 2:
            raise ValueError("positions must have shape (n, 2)")
        if not r > 0:
            raise ValueError("r must be positive")
        self.positions = positions
        self.r = float(r)
        self.generation = generation
        self.pairs = _kd_pairs(positions, self.r)
        self._csr = None

    @classmethod
    def build(cls, positions: np.ndarray, r: float, generation: int = 0) -> "SpatialIndex":
        return cls(positions, r, generation)

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def indptr(self) -> np.ndarray:
        return self._adjacency()[0]

    @property
    def indices(self) -> np.ndarray:
        return self._adjacency()[1]

    def _adjacency(self):
        if self._csr is None:
            self._csr = _to_csr(self.pairs, self.n)
        return self._csr

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        """Ids ``j != i`` with ``|X_i - X_j| < r``, in ascending order."""
        if not 0 <= i < self.n:
            raise IndexError(f"unknown node id {i}")
        indptr, indices = self._adjacency()
        return indices[indptr[i]:indptr[i + 1]]


def _kd_pairs(pos: np.ndarray, r: float) -> np.ndarray:
    n = len(pos)
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    # query_pairs is inclusive at distance r; neighbors are strictly closer.
    pairs = cKDTree(pos).query_pairs(r, output_type="ndarray").astype(np.int64)
    d = pos[pairs[:, 0]] - pos[pairs[:, 1]]
    pairs = pairs[np.einsum("ij,ij->i", d, d) < r * r]
    return pairs[np.argsort(pairs[:, 0] * n + pairs[:, 1])]


def _to_csr(pairs: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    src = np.concatenate((pairs[:, 0], pairs[:, 1]))
    dst = np.concatenate((pairs[:, 1], pairs[:, 0]))
    order = np.argsort(src * n + dst)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst[order]


def brute_force_pairs(positions: np.ndarray, r: float) -> np.ndarray:
    """All-pairs O(n^2) reference for :class:`SpatialIndex` (sorted ``i < j`` pairs)."""
    positions = np.asarray(positions, dtype=float)
    d = positions[:, None, :] - positions[None, :, :]
    close = np.einsum("ijk,ijk->ij", d, d) < r * r
    i, j = np.nonzero(np.triu(close, k=1))
    return np.stack((i, j), axis=1).astype(np.int64)
