"""Point clouds, pairwise distances, nearest neighbors and subsampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import InvalidArgumentError, InvalidInputError

METRICS = ("euclidean", "manhattan", "chebyshev", "cosine")

_SCIPY_METRIC = {
    "euclidean": "euclidean",
    "manhattan": "cityblock",
    "chebyshev": "chebyshev",
    "cosine": "cosine",
}

SeedLike = Union[int, np.random.SeedSequence, None]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """PCG64 generator; the stream for a given integer seed is stable across runs."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def derive_seed(seed: int, *keys: int) -> np.random.SeedSequence:
    """Child seed for a (seed, key...) path, independent of evaluation order."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))


@dataclass(frozen=True)
class PointCloud:
    """n points in R^d stored as a read-only float64 ``(n, d)`` array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise InvalidInputError(f"point cloud must be 2-D, got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidInputError(f"point cloud needs n >= 1 and d >= 1, got shape {pts.shape}")
        bad = ~np.isfinite(pts)
        if bad.any():
            row = int(np.argwhere(bad)[0, 0])
            raise InvalidInputError(f"non-finite coordinate in row {row}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def scaled(self, s: float) -> "PointCloud":
        return PointCloud(self.points * s)

    def take(self, idx) -> "PointCloud":
        return PointCloud(self.points[np.asarray(idx)])


def as_cloud(x) -> PointCloud:
    return x if isinstance(x, PointCloud) else PointCloud(x)


def condensed_index(n: int, i: int, j: int) -> int:
    """Position of pair (i, j), i != j, in the row-major upper triangle.

    For i < j the index is ``n*i - i*(i+1)/2 + (j - i - 1)``.
    """
    if i == j:
        raise InvalidArgumentError("no entry for a point paired with itself")
    if i > j:
        i, j = j, i
    return n * i - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class DistanceMatrix:
    """Condensed pairwise distances: one entry per unordered pair."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.float64, copy=True).ravel()
        n = int(self.n)
        if n < 1:
            raise InvalidInputError("distance matrix needs at least one point")
        if e.size != n * (n - 1) // 2:
            raise InvalidInputError(f"expected {n * (n - 1) // 2} entries for n={n}, got {e.size}")
        if e.size and (not np.isfinite(e).all() or (e < 0).any()):
            raise InvalidInputError("distances must be finite and non-negative")
        e.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "entries", e)

    def __getitem__(self, pair) -> float:
        i, j = pair
        if i == j:
            return 0.0
        return float(self.entries[condensed_index(self.n, i, j)])

    def square(self) -> np.ndarray:
        if self.n == 1:
            return np.zeros((1, 1))
        return squareform(self.entries, checks=False)

    @classmethod
    def from_square(cls, mat) -> "DistanceMatrix":
        mat = np.asarray(mat, dtype=np.float64)
        n = mat.shape[0]
        iu = np.triu_indices(n, k=1)
        return cls(n, mat[iu])

    def scaled(self, s: float) -> "DistanceMatrix":
        return DistanceMatrix(self.n, self.entries * s)


def pairwise_distances(cloud, metric: str = "euclidean") -> DistanceMatrix:
    cloud = as_cloud(cloud)
    if metric not in METRICS:
        raise InvalidArgumentError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")
    if metric == "cosine":
        norms = np.linalg.norm(cloud.points, axis=1)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise InvalidInputError(f"zero-norm point at row {int(zero[0])} under cosine distance")
    if cloud.n == 1:
        return DistanceMatrix(1, np.empty(0))
    d = pdist(cloud.points, metric=_SCIPY_METRIC[metric])
    if metric == "cosine":
        # 1 - cos can come out a hair negative for parallel vectors
        np.maximum(d, 0.0, out=d)
    return DistanceMatrix(cloud.n, d)


@dataclass(frozen=True)
class NeighborTable:
    indices: np.ndarray
    distances: np.ndarray

    @property
    def k(self) -> int:
        return self.indices.shape[1]


def knn(dist: DistanceMatrix, k: int) -> NeighborTable:
    """k nearest other points per row, ascending; ties go to the lower index."""
    n = dist.n
    if not 1 <= k <= n - 1:
        raise InvalidArgumentError(f"k must satisfy 1 <= k <= n-1 = {n - 1}, got {k}")
    sq = dist.square()
    np.fill_diagonal(sq, np.inf)
    # stable sort keeps index order among equal distances
    order = np.argsort(sq, axis=1, kind="stable")[:, :k]
    d = np.take_along_axis(sq, order, axis=1)
    return NeighborTable(order, d)


def subsample_indices(n: int, m: int, seed: SeedLike) -> np.ndarray:
    if not 1 <= m <= n:
        raise InvalidArgumentError(f"subsample size must satisfy 1 <= m <= n = {n}, got {m}")
    return make_rng(seed).choice(n, size=m, replace=False)


def subsample(cloud, m: int, seed: SeedLike) -> PointCloud:
    """m distinct rows drawn uniformly without replacement."""
    cloud = as_cloud(cloud)
    return cloud.take(subsample_indices(cloud.n, m, seed))


def enclosing_radius(dist: DistanceMatrix) -> float:
    if dist.n == 1:
        return 0.0
    return float(dist.square().max(axis=1).min())
