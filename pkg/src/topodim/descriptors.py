"""Power-weighted lifespan sums of persistence diagrams.

``E_alpha^i = sum over finite dimension-i intervals of (death - birth)**alpha``.
Infinite bars never contribute.  With ``alpha == 0`` every finite interval
counts 1, zero-length ones included (``0**0 == 1``) unless
``include_zero_length`` is off.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .errors import InvalidArgumentError
from .geometry import PointCloud, as_cloud, pairwise_distances
from .persistence import (
    PersistenceConfig,
    PersistenceDiagram,
    h0_persistence,
    rips_persistence,
)


@dataclass(frozen=True)
class DescriptorSpec:
    i: int = 0
    alpha: float = 1.0
    averaged: bool = False
    include_zero_length: bool = True

    def __post_init__(self):
        if self.i < 0:
            raise InvalidArgumentError(f"homology dimension must be >= 0, got {self.i}")
        if not self.alpha >= 0:
            raise InvalidArgumentError(f"alpha must be >= 0, got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def name(self) -> str:
        base = f"E_{self.alpha:g}^{self.i}"
        return base + "_avg" if self.averaged else base

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "alpha": self.alpha,
            "averaged": self.averaged,
            "include_zero_length": self.include_zero_length,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DescriptorSpec":
        return cls(
            i=int(d.get("i", 0)),
            alpha=float(d.get("alpha", 1.0)),
            averaged=bool(d.get("averaged", False)),
            include_zero_length=bool(d.get("include_zero_length", True)),
        )


@dataclass(frozen=True)
class DescriptorValue:
    value: float
    n_intervals: Union[int, float]
    spec: DescriptorSpec

    def to_dict(self) -> dict:
        return {"value": self.value, "n_intervals": self.n_intervals, "spec": self.spec.to_dict()}


def _lifespans(diag: PersistenceDiagram, spec: DescriptorSpec) -> np.ndarray:
    if spec.i > diag.max_dim:
        raise InvalidArgumentError(
            f"descriptor needs homology dimension {spec.i} but the diagram stops at {diag.max_dim}"
        )
    return diag.lifespans(spec.i, include_zero_length=spec.include_zero_length)


def e_alpha(diag: PersistenceDiagram, spec: DescriptorSpec = DescriptorSpec()) -> DescriptorValue:
    life = _lifespans(diag, spec)
    value = float(np.sum(life ** spec.alpha)) if len(life) else 0.0
    return DescriptorValue(value, len(life), replace(spec, averaged=False))


def averaged_e_alpha(diag: PersistenceDiagram, spec: DescriptorSpec = DescriptorSpec(averaged=True)) -> DescriptorValue:
    """``e_alpha`` divided by the number of finite intervals; 0 for none."""
    total = e_alpha(diag, spec)
    value = total.value / total.n_intervals if total.n_intervals else 0.0
    return DescriptorValue(value, total.n_intervals, replace(spec, averaged=True))


def descriptor(diag: PersistenceDiagram, spec: DescriptorSpec) -> DescriptorValue:
    return averaged_e_alpha(diag, spec) if spec.averaged else e_alpha(diag, spec)


def cloud_diagram(cloud, max_dim: int, config: PersistenceConfig = PersistenceConfig()) -> PersistenceDiagram:
    """Diagram up to ``max_dim``; dimension 0 alone goes through union-find."""
    dist = pairwise_distances(as_cloud(cloud), config.metric)
    if max_dim == 0 and config.threshold == "auto":
        # the enclosing radius never cuts an MST edge, so the full H0 is exact
        return h0_persistence(dist)
    return rips_persistence(dist, max_dim, config.threshold, config.max_simplices)


def cloud_descriptors(cloud, specs: Sequence[DescriptorSpec], config: PersistenceConfig = PersistenceConfig()):
    """Evaluate several specs on one cloud, sharing a single diagram."""
    diag = cloud_diagram(cloud, max(s.i for s in specs), config)
    return [descriptor(diag, s) for s in specs]


def class_averaged_descriptor(
    clouds: Sequence[PointCloud],
    spec: DescriptorSpec = DescriptorSpec(),
    config: PersistenceConfig = PersistenceConfig(),
) -> DescriptorValue:
    """Arithmetic mean of the per-cloud values; ``n_intervals`` is the mean count."""
    if len(clouds) == 0:
        raise InvalidArgumentError("class averaging needs at least one cloud")
    vals = [cloud_descriptors(c, [spec], config)[0] for c in clouds]
    return mean_descriptor(vals)


def mean_descriptor(values: Sequence[DescriptorValue]) -> DescriptorValue:
    if len(values) == 0:
        raise InvalidArgumentError("cannot average an empty list of descriptor values")
    specs = {v.spec for v in values}
    if len(specs) != 1:
        raise InvalidArgumentError("cannot average descriptor values computed with different specs")
    value = float(np.mean([v.value for v in values]))
    count = float(np.mean([v.n_intervals for v in values]))
    return DescriptorValue(value, count, values[0].spec)
