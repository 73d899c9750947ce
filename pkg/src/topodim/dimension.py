"""Intrinsic dimension estimators.

``ph_dim`` fits the growth of the expected power-weighted lifespan sum with
sample size: if ``E_alpha^i`` of n samples grows like ``n**beta`` then the
dimension is ``alpha / (1 - beta)``.  ``twonn``, ``mle_id`` and
``correlation_dimension`` are the usual nearest-neighbor and
pair-counting baselines.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .descriptors import DescriptorSpec, descriptor
from .errors import DegenerateFitError, InvalidArgumentError, NonEstimableError
from .geometry import (
    PointCloud,
    as_cloud,
    derive_seed,
    knn,
    pairwise_distances,
    subsample_indices,
)
from .persistence import PersistenceConfig, mst_edge_weights, rips_persistence

BETA_CEILING = 1.0 - 1e-6
REPORTED_DIGITS = 12


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    r_squared: float


def fit_power_law(xs, ys) -> PowerLawFit:
    """Ordinary least squares of log(ys) on log(xs)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise InvalidArgumentError("xs and ys must be 1-D sequences of equal length")
    if len(xs) < 2:
        raise InvalidArgumentError("a power-law fit needs at least 2 points")
    if not (np.all(xs > 0) and np.all(ys > 0)):
        raise InvalidArgumentError("power-law fit requires strictly positive values")
    lx, ly = np.log(xs), np.log(ys)
    dx = lx - lx.mean()
    dy = ly - ly.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateFitError("all xs are equal; slope is undefined")
    slope = float(dx @ dy) / sxx
    intercept = float(ly.mean() - slope * lx.mean())
    syy = float(dy @ dy)
    if syy == 0.0:
        r2 = 1.0
    else:
        resid = dy - slope * dx
        r2 = 1.0 - float(resid @ resid) / syy
    return PowerLawFit(slope, intercept, min(1.0, max(0.0, r2)))


def fit_line(xs, ys) -> Tuple[float, float]:
    """Least-squares (slope, intercept) of ys on xs."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateFitError("all xs are equal; slope is undefined")
    slope = float(dx @ (y - y.mean())) / sxx
    return slope, float(y.mean() - slope * x.mean())


@dataclass(frozen=True)
class SampleSchedule:
    sizes: Tuple[int, ...]
    repeats: int = 5
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) < 3:
            raise InvalidArgumentError(f"schedule needs at least 3 sizes, got {len(sizes)}")
        if sizes[0] < 2 or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise InvalidArgumentError(f"schedule sizes must be strictly increasing and >= 2: {sizes}")
        if self.repeats < 1:
            raise InvalidArgumentError(f"repeats must be >= 1, got {self.repeats}")

    @classmethod
    def default(cls, n: int, seed: int = 0, repeats: int = 5, count: int = 8, lo: int = 64, hi: int = 4096):
        """``count`` sizes log-spaced from ``lo`` to ``min(n, hi)``."""
        top = min(n, hi)
        bottom = min(lo, max(2, top // 8))
        sizes = sorted(set(np.unique(np.round(np.geomspace(bottom, top, count)).astype(int)).tolist()))
        return cls(tuple(sizes), repeats, seed)


@dataclass(frozen=True)
class PhDimEstimate:
    beta: float
    dimension: float
    alpha: float
    i: int
    r_squared: float
    intercept: float
    points: Tuple[Tuple[float, float], ...]
    schedule: SampleSchedule
    warnings: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "method": "phdim",
            "dimension": self.dimension,
            "beta": self.beta,
            "alpha": self.alpha,
            "i": self.i,
            "r_squared": self.r_squared,
            "intercept": self.intercept,
            "points": [list(p) for p in self.points],
            "sizes": list(self.schedule.sizes),
            "repeats": self.schedule.repeats,
            "seed": self.schedule.seed,
            "warnings": list(self.warnings),
        }


def _subsample_e(points: np.ndarray, m: int, seed, i: int, alpha: float, config: PersistenceConfig) -> float:
    idx = subsample_indices(len(points), m, seed)
    dist = pairwise_distances(points[idx], config.metric)
    if i == 0 and config.threshold == "auto":
        return float(np.sum(mst_edge_weights(dist) ** alpha))
    diag = rips_persistence(dist, i, config.threshold, config.max_simplices)
    return descriptor(diag, DescriptorSpec(i=i, alpha=alpha)).value


def ph_dim(
    cloud,
    i: int = 0,
    alpha: float = 1.0,
    schedule: Optional[SampleSchedule] = None,
    config: PersistenceConfig = PersistenceConfig(),
    workers: int = 1,
) -> PhDimEstimate:
    """Persistent-homology dimension ``alpha / (1 - beta)``.

    For every schedule size, ``repeats`` independent subsamples are drawn
    (seeded by ``(seed, size index, repeat)``), their ``E_alpha^i`` values are
    averaged, and ``beta`` is the slope of log(mean E) against log(size),
    reported to ``REPORTED_DIGITS`` significant digits.
    """
    cloud = as_cloud(cloud)
    if not alpha > 0:
        raise InvalidArgumentError(f"alpha must be > 0 for ph_dim, got {alpha}")
    if i < 0:
        raise InvalidArgumentError(f"homology dimension must be >= 0, got {i}")
    if schedule is None:
        schedule = SampleSchedule.default(cloud.n)
    if schedule.sizes[-1] > cloud.n:
        raise InvalidArgumentError(
            f"largest schedule size {schedule.sizes[-1]} exceeds the cloud size {cloud.n}"
        )
    jobs = [
        (m, derive_seed(schedule.seed, si, r))
        for si, m in enumerate(schedule.sizes)
        for r in range(schedule.repeats)
    ]

    def run(job):
        m, seed = job
        return _subsample_e(cloud.points, m, seed, i, alpha, config)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(run, jobs))
    else:
        values = [run(j) for j in jobs]
    means = np.array(values).reshape(len(schedule.sizes), schedule.repeats).mean(axis=1)
    if not np.all(means > 0):
        raise NonEstimableError("mean descriptor is zero at some sample size; nothing to fit")
    sizes = np.array(schedule.sizes, dtype=np.float64)
    fit = fit_power_law(sizes, means)
    # last-ulp noise (e.g. from rescaling the cloud) must not leak into the
    # reported estimate
    beta = float(f"{fit.slope:.{REPORTED_DIGITS}g}")
    if beta >= BETA_CEILING:
        raise NonEstimableError(f"fitted slope beta={beta:.6g} >= 1; dimension diverges")
    warnings = []
    if beta <= 0:
        warnings.append(f"non-positive slope beta={beta:.6g}: descriptor does not grow with n")
    return PhDimEstimate(
        beta=beta,
        dimension=alpha / (1.0 - beta),
        alpha=float(alpha),
        i=i,
        r_squared=fit.r_squared,
        intercept=fit.intercept,
        points=tuple(zip(np.log(sizes).tolist(), np.log(means).tolist())),
        schedule=schedule,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class IdEstimate:
    method: str
    value: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"method": self.method, "value": self.value, "diagnostics": self.diagnostics}


def _neighbor_distances(cloud: PointCloud, k: int, metric: str, method: str, max_drop: float):
    if not 1 <= k <= cloud.n - 1:
        raise InvalidArgumentError(f"{method} needs 1 <= k <= n-1 = {cloud.n - 1}, got k={k}")
    dist = pairwise_distances(cloud, metric)
    T = knn(dist, k).distances
    keep = T[:, 0] > 0
    dropped = int((~keep).sum())
    if dropped > max_drop * cloud.n:
        raise InvalidArgumentError(
            f"{method}: {dropped} of {cloud.n} points have a duplicate neighbor (limit {max_drop:.0%})"
        )
    return T[keep], dropped


def twonn(cloud, discard_fraction: float = 0.1, metric: str = "euclidean", max_drop: float = 0.1) -> IdEstimate:
    """Two-nearest-neighbor estimator: regress -log(1 - F(mu)) on log(mu)
    through the origin, mu = r2 / r1, after dropping the largest
    ``discard_fraction`` of the ratios."""
    cloud = as_cloud(cloud)
    if cloud.n < 3:
        raise InvalidArgumentError(f"twonn needs at least 3 points, got {cloud.n}")
    T, dropped = _neighbor_distances(cloud, 2, metric, "twonn", max_drop)
    mu = np.sort(T[:, 1] / T[:, 0])
    N = len(mu)
    F = np.arange(1, N + 1) / N
    keep = int(math.floor(N * (1.0 - discard_fraction)))
    keep = min(keep, N - 1)
    if keep < 2:
        raise NonEstimableError("twonn: too few ratios left after discarding the top fraction")
    x = np.log(mu[:keep])
    y = -np.log1p(-F[:keep])
    sxx = float(x @ x)
    if sxx == 0.0:
        raise NonEstimableError("twonn: all neighbor ratios equal 1")
    d = float(x @ y) / sxx
    return IdEstimate("twonn", d, {"n_used": N, "n_fitted": keep, "dropped": dropped,
                                   "discard_fraction": discard_fraction})


def mle_id(cloud, k: int = 10, metric: str = "euclidean", max_drop: float = 0.1) -> IdEstimate:
    """Levina-Bickel maximum likelihood estimate.  Per-point inverse
    estimates ``mean_j log(T_k / T_j)`` are averaged before inverting."""
    cloud = as_cloud(cloud)
    if not 2 <= k <= cloud.n - 1:
        raise InvalidArgumentError(f"mle needs 2 <= k <= n-1 = {cloud.n - 1}, got k={k}")
    T, dropped = _neighbor_distances(cloud, k, metric, "mle", max_drop)
    inv = np.log(T[:, -1:] / T[:, :-1]).mean(axis=1)
    mean_inv = float(inv.mean())
    if mean_inv <= 0:
        raise NonEstimableError("mle: all neighbor distances equal; dimension is unbounded")
    return IdEstimate("mle", 1.0 / mean_inv, {"k": k, "n_used": len(T), "dropped": dropped})


def correlation_integral(dist_entries: np.ndarray, radii, n: int) -> np.ndarray:
    """C(r) = 2 / (n (n-1)) * #{pairs with distance < r}."""
    srt = np.sort(dist_entries)
    counts = np.searchsorted(srt, np.asarray(radii, dtype=np.float64), side="left")
    return 2.0 * counts / (n * (n - 1))


def correlation_dimension(
    cloud,
    radii: Union[Sequence[float], str] = "auto",
    n_radii: int = 20,
    metric: str = "euclidean",
) -> IdEstimate:
    """Slope of log C(r) against log r over the radii where 0 < C(r) < 1.
    ``"auto"`` uses radii log-spaced between the 5th and 50th percentile of
    the pairwise distances."""
    cloud = as_cloud(cloud)
    if cloud.n < 10:
        raise InvalidArgumentError(f"correlation dimension needs at least 10 points, got {cloud.n}")
    dist = pairwise_distances(cloud, metric)
    if isinstance(radii, str):
        if radii != "auto":
            raise InvalidArgumentError(f"radii must be a sequence or 'auto', got {radii!r}")
        lo, hi = np.percentile(dist.entries, [5, 50])
        if not lo > 0:
            raise NonEstimableError("correlation dimension: 5th percentile distance is zero")
        r = np.geomspace(lo, hi, n_radii)
    else:
        r = np.asarray(radii, dtype=np.float64)
        if r.ndim != 1 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise InvalidArgumentError("radii must be positive and strictly increasing")
    C = correlation_integral(dist.entries, r, cloud.n)
    usable = (C > 0) & (C < 1)
    if usable.sum() < 3:
        raise NonEstimableError(f"correlation dimension: only {int(usable.sum())} usable radii (need 3)")
    fit = fit_power_law(r[usable], C[usable])
    return IdEstimate("corrdim", fit.slope, {
        "radii": r[usable].tolist(),
        "C": C[usable].tolist(),
        "r_squared": fit.r_squared,
        "intercept": fit.intercept,
    })


def estimate_id(cloud, method: str, k: int = 10, **kwargs) -> IdEstimate:
    if method == "twonn":
        return twonn(cloud, **kwargs)
    if method == "mle":
        return mle_id(cloud, k=k, **kwargs)
    if method == "corrdim":
        return correlation_dimension(cloud, **kwargs)
    if method == "phdim":
        est = ph_dim(cloud, **kwargs)
        return IdEstimate("phdim", est.dimension, est.to_dict())
    raise InvalidArgumentError(f"unknown method {method!r}")
