"""Layer profiles across network depth and the generalization report.

A profile manifest is a JSON document::

    {
      "sources": [
        {"path": "layer0_cat.npy", "format": "npy", "layer_index": 0,
         "relative_depth": 0.5, "class_label": "cat"},
        ...
      ],
      "descriptors": [{"i": 0, "alpha": 1.0}, {"i": 1, "alpha": 1.0}],
      "phdim": {"i": 0, "alpha": 1.0, "repeats": 5, "sizes": [64, 128, 256]},
      "persistence": {"metric": "euclidean", "threshold": "auto"},
      "batch_size": 300, "batches": 5, "seed": 0, "on_small_layer": "error"
    }

Paths are relative to the manifest.  A 4-D NPY source is an
``n x h x w x c`` feature map and is reduced by global average pooling.
``"phdim": false`` switches the per-batch dimension estimate off.

Batches are drawn with seeds derived from (seed, class label, batch index)
and not from the layer, so every layer sees the same examples.
"""

from __future__ import annotations

import json
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .descriptors import (
    DescriptorSpec,
    DescriptorValue,
    cloud_descriptors,
    mean_descriptor,
)
from .dimension import SampleSchedule, fit_line, ph_dim
from .errors import DegenerateInputError, InvalidArgumentError, InvalidInputError, LoadError, TopoDimError
from .geometry import PointCloud, derive_seed, subsample_indices
from .io import infer_format, read_csv_array, read_npy_array
from .persistence import PersistenceConfig

DEFAULT_BATCH_SIZE = 300
DEFAULT_BATCHES = 5
DEFAULT_EXAMPLES_PER_CLASS = 350


def global_average_pool(tensor) -> PointCloud:
    """Spatial mean of an ``n x h x w x c`` activation tensor -> ``n x c``."""
    t = np.asarray(tensor, dtype=np.float64)
    if t.ndim != 4:
        raise InvalidInputError(f"expected a 4-D n x h x w x c tensor, got shape {t.shape}")
    if min(t.shape) < 1:
        raise InvalidInputError(f"every tensor dimension must be >= 1, got shape {t.shape}")
    if not np.isfinite(t).all():
        raise InvalidInputError("tensor contains NaN or infinity")
    return PointCloud(t.mean(axis=(1, 2)))


@dataclass(frozen=True)
class EmbeddingSource:
    path: Path
    format: str
    layer_index: int
    relative_depth: Optional[float] = None
    class_label: Optional[str] = None

    def load(self) -> np.ndarray:
        """Rows of this source; 4-D feature maps are pooled first."""
        if not Path(self.path).is_file():
            raise LoadError(self.path, "no such file")
        if self.format == "npy":
            arr = read_npy_array(self.path, allowed_ndim=(2, 4))
            if arr.ndim == 4:
                return global_average_pool(arr).points
            return arr
        return read_csv_array(self.path)

    @classmethod
    def from_dict(cls, d: dict, base: Path = Path(".")) -> "EmbeddingSource":
        if "path" not in d:
            raise InvalidInputError(f"source entry without a path: {d}")
        path = Path(d["path"])
        if not path.is_absolute():
            path = base / path
        depth = d.get("relative_depth")
        label = d.get("class_label")
        return cls(
            path=path,
            format=infer_format(path, d.get("format")),
            layer_index=int(d.get("layer_index", 0)),
            relative_depth=None if depth is None else float(depth),
            class_label=None if label is None else str(label),
        )


@dataclass(frozen=True)
class PhDimSettings:
    i: int = 0
    alpha: float = 1.0
    sizes: Optional[Tuple[int, ...]] = None
    repeats: int = 5


@dataclass(frozen=True)
class ProfileConfig:
    descriptors: Tuple[DescriptorSpec, ...] = (DescriptorSpec(),)
    phdim: Optional[PhDimSettings] = PhDimSettings()
    persistence: PersistenceConfig = PersistenceConfig()
    batch_size: int = DEFAULT_BATCH_SIZE
    batches: int = DEFAULT_BATCHES
    seed: int = 0
    on_small_layer: str = "error"

    def __post_init__(self):
        if not self.descriptors:
            raise InvalidArgumentError("profile needs at least one descriptor spec")
        if self.batch_size < 2 or self.batches < 1:
            raise InvalidArgumentError("batch_size must be >= 2 and batches >= 1")
        if self.on_small_layer not in ("error", "shrink"):
            raise InvalidArgumentError("on_small_layer must be 'error' or 'shrink'")

    def to_dict(self) -> dict:
        return {
            "descriptors": [s.to_dict() for s in self.descriptors],
            "phdim": None if self.phdim is None else {
                "i": self.phdim.i, "alpha": self.phdim.alpha,
                "sizes": None if self.phdim.sizes is None else list(self.phdim.sizes),
                "repeats": self.phdim.repeats,
            },
            "persistence": {
                "metric": self.persistence.metric,
                "threshold": self.persistence.threshold,
                "max_simplices": self.persistence.max_simplices,
            },
            "batch_size": self.batch_size,
            "batches": self.batches,
            "seed": self.seed,
            "on_small_layer": self.on_small_layer,
        }


@dataclass(frozen=True)
class PhDimSummary:
    """PH_dim averaged over batches and classes."""

    dimension: float
    beta: float
    r_squared: float
    n_estimates: int


@dataclass(frozen=True)
class LayerEntry:
    layer_index: int
    relative_depth: float
    descriptors: Tuple[DescriptorValue, ...]
    phdim: Optional[PhDimSummary]
    classes: Tuple[str, ...]
    batch_size: int
    warnings: Tuple[str, ...] = ()


@dataclass(frozen=True)
class LayerProfile:
    layers: Tuple[LayerEntry, ...]
    config: ProfileConfig
    provenance: dict = field(default_factory=dict)

    def values(self, spec_index: int = 0) -> np.ndarray:
        return np.array([layer.descriptors[spec_index].value for layer in self.layers])

    def to_dict(self) -> dict:
        return {
            "layers": [
                {
                    "layer_index": L.layer_index,
                    "relative_depth": L.relative_depth,
                    "classes": list(L.classes),
                    "batch_size": L.batch_size,
                    "descriptors": [dict(v.to_dict(), name=v.spec.name) for v in L.descriptors],
                    "phdim": None if L.phdim is None else {
                        "dimension": L.phdim.dimension,
                        "beta": L.phdim.beta,
                        "r_squared": L.phdim.r_squared,
                        "n_estimates": L.phdim.n_estimates,
                    },
                    "warnings": list(L.warnings),
                }
                for L in self.layers
            ],
            "config": self.config.to_dict(),
            "provenance": self.provenance,
        }

    def table(self):
        header = ["layer_index", "relative_depth"] + [s.name for s in self.config.descriptors]
        header += ["phdim", "phdim_r_squared"]
        rows = []
        for L in self.layers:
            row = [L.layer_index, L.relative_depth] + [v.value for v in L.descriptors]
            row += [None, None] if L.phdim is None else [L.phdim.dimension, L.phdim.r_squared]
            rows.append(row)
        return header, rows


def label_key(label: Optional[str]) -> int:
    """Stable integer key of a class label for seed derivation."""
    return zlib.crc32(("" if label is None else label).encode("utf-8"))


def _int_seed(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint32)[0])


def _batch_job(points, bs, label, b, config: ProfileConfig):
    n = len(points)
    if bs >= n:
        idx = np.arange(n)
    else:
        idx = subsample_indices(n, bs, derive_seed(config.seed, label_key(label), b))
    batch = PointCloud(points[idx])
    values = cloud_descriptors(batch, config.descriptors, config.persistence)
    est = None
    if config.phdim is not None:
        ph = config.phdim
        phseed = _int_seed(derive_seed(config.seed, label_key(label), b, 1))
        if ph.sizes is None:
            sched = SampleSchedule.default(batch.n, seed=phseed, repeats=ph.repeats)
        else:
            sched = SampleSchedule(tuple(ph.sizes), ph.repeats, phseed)
        est = ph_dim(batch, ph.i, ph.alpha, sched, config.persistence)
    return values, est


def layer_profile(sources: Sequence[EmbeddingSource], config: ProfileConfig = ProfileConfig(), workers: int = 1) -> LayerProfile:
    """Per-layer descriptors and PH_dim: batch-averaged within each class,
    then averaged over classes with equal weights."""
    if not sources:
        raise InvalidArgumentError("layer profile needs at least one source")
    by_layer: Dict[int, Dict[Optional[str], List[EmbeddingSource]]] = {}
    for src in sources:
        by_layer.setdefault(src.layer_index, {}).setdefault(src.class_label, []).append(src)
    layer_ids = sorted(by_layer)
    n_layers = len(layer_ids)

    depths = []
    for lid in layer_ids:
        given = {s.relative_depth for group in by_layer[lid].values() for s in group} - {None}
        if len(given) > 1:
            raise InvalidInputError(f"layer {lid} has conflicting relative depths {sorted(given)}")
        depths.append(given.pop() if given else (lid + 1) / n_layers)
    if any(not 0 < d <= 1 for d in depths):
        raise InvalidInputError(f"relative depths must lie in (0, 1]: {depths}")
    if any(b <= a for a, b in zip(depths, depths[1:])):
        raise InvalidInputError(f"relative depth must increase with layer index: {depths}")

    jobs, meta = [], []
    layer_info = []
    for lid in layer_ids:
        groups = by_layer[lid]
        labels = sorted(groups, key=lambda x: "" if x is None else x)
        warnings = []
        sizes = []
        for label in labels:
            pts = np.concatenate([s.load() for s in groups[label]], axis=0)
            if pts.shape[0] < config.batch_size:
                msg = f"layer {lid} class {label!r}: {pts.shape[0]} points < batch size {config.batch_size}"
                if config.on_small_layer == "error":
                    raise InvalidInputError(msg)
                warnings.append(msg + "; batch shrunk")
            bs = min(config.batch_size, pts.shape[0])
            sizes.append(bs)
            for b in range(config.batches):
                jobs.append((pts, bs, label, b))
                meta.append((lid, label))
        layer_info.append((lid, labels, warnings, min(sizes)))

    def run(job):
        return _batch_job(*job, config)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    grouped: Dict[Tuple[int, Optional[str]], list] = {}
    for key, res in zip(meta, results):
        grouped.setdefault(key, []).append(res)

    entries = []
    for (lid, labels, warnings, bs), depth in zip(layer_info, depths):
        per_spec = []
        for k in range(len(config.descriptors)):
            class_means = [mean_descriptor([r[0][k] for r in grouped[(lid, lab)]]) for lab in labels]
            per_spec.append(mean_descriptor(class_means))
        summary = None
        if config.phdim is not None:
            ests = [[r[1] for r in grouped[(lid, lab)]] for lab in labels]
            summary = PhDimSummary(
                dimension=float(np.mean([np.mean([e.dimension for e in es]) for es in ests])),
                beta=float(np.mean([np.mean([e.beta for e in es]) for es in ests])),
                r_squared=float(np.mean([np.mean([e.r_squared for e in es]) for es in ests])),
                n_estimates=sum(len(es) for es in ests),
            )
        entries.append(LayerEntry(
            layer_index=lid,
            relative_depth=depth,
            descriptors=tuple(per_spec),
            phdim=summary,
            classes=tuple("" if lab is None else lab for lab in labels),
            batch_size=bs,
            warnings=tuple(warnings),
        ))
    provenance = {
        "sources": [str(s.path) for s in sources],
        "seed": config.seed,
    }
    return LayerProfile(tuple(entries), config, provenance)


def _load_json(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise LoadError(path, "no such file")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LoadError(path, f"invalid JSON: {exc.msg}", exc.lineno) from None


def _persistence_from_dict(d: dict) -> PersistenceConfig:
    base = PersistenceConfig()
    thr = d.get("threshold", base.threshold)
    return PersistenceConfig(
        metric=d.get("metric", base.metric),
        max_dim=int(d.get("max_dim", base.max_dim)),
        threshold=thr if thr == "auto" else float(thr),
        max_simplices=int(d.get("max_simplices", base.max_simplices)),
    )


def load_manifest(path, seed: Optional[int] = None) -> Tuple[List[EmbeddingSource], ProfileConfig]:
    """Parse a profile manifest; ``seed`` overrides the manifest's seed."""
    path = Path(path)
    doc = _load_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("sources"), list):
        raise LoadError(path, "manifest must be an object with a 'sources' list")
    try:
        sources = [EmbeddingSource.from_dict(s, path.parent) for s in doc["sources"]]
        specs = tuple(DescriptorSpec.from_dict(s) for s in doc.get("descriptors", [{}]))
        ph = doc.get("phdim", {})
        phdim = None
        if ph is not False and ph is not None:
            phdim = PhDimSettings(
                i=int(ph.get("i", 0)),
                alpha=float(ph.get("alpha", 1.0)),
                sizes=None if ph.get("sizes") is None else tuple(int(s) for s in ph["sizes"]),
                repeats=int(ph.get("repeats", 5)),
            )
        config = ProfileConfig(
            descriptors=specs,
            phdim=phdim,
            persistence=_persistence_from_dict(doc.get("persistence", {})),
            batch_size=int(doc.get("batch_size", DEFAULT_BATCH_SIZE)),
            batches=int(doc.get("batches", DEFAULT_BATCHES)),
            seed=int(doc.get("seed", 0) if seed is None else seed),
            on_small_layer=doc.get("on_small_layer", "error"),
        )
    except (TypeError, AttributeError, KeyError) as exc:
        raise LoadError(path, f"malformed manifest: {exc}") from None
    return sources, config


# -- generalization --------------------------------------------------------


def pearson_r(xs, ys) -> float:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise InvalidArgumentError("pearson_r needs two equal-length sequences of length >= 2")
    # test constancy directly: the centred sum of squares of a constant
    # sequence need not round to zero
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInputError("pearson_r is undefined for a constant sequence")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class ModelRecord:
    model_id: str
    test_accuracy: float
    last_layer_descriptor: DescriptorValue

    def __post_init__(self):
        if not 0.0 <= self.test_accuracy <= 1.0:
            raise InvalidInputError(f"{self.model_id}: test accuracy {self.test_accuracy} outside [0, 1]")


WEAK_PREDICTOR = 0.5


@dataclass(frozen=True)
class GeneralizationReport:
    records: Tuple[ModelRecord, ...]
    r: float
    trend_slope: float
    trend_intercept: float
    spec: DescriptorSpec

    @property
    def weak_predictor(self) -> bool:
        return abs(self.r) < WEAK_PREDICTOR

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "pearson_r": self.r,
            "weak_predictor": self.weak_predictor,
            "trend": {"slope": self.trend_slope, "intercept": self.trend_intercept,
                      "model": "test_accuracy = intercept + slope * descriptor"},
            "records": [
                {"model_id": m.model_id, "descriptor": m.last_layer_descriptor.value,
                 "n_intervals": m.last_layer_descriptor.n_intervals, "test_accuracy": m.test_accuracy}
                for m in self.records
            ],
        }

    def table(self):
        header = ["model_id", "descriptor", "test_accuracy"]
        return header, [[m.model_id, m.last_layer_descriptor.value, m.test_accuracy] for m in self.records]


def generalization_report(records: Sequence[ModelRecord]) -> GeneralizationReport:
    """Correlate the last-layer descriptor with test accuracy across models."""
    if len(records) < 3:
        raise InvalidArgumentError(f"generalization report needs at least 3 records, got {len(records)}")
    specs = {r.last_layer_descriptor.spec for r in records}
    if len(specs) != 1:
        raise InvalidArgumentError("all records must use the same descriptor spec")
    x = [r.last_layer_descriptor.value for r in records]
    y = [r.test_accuracy for r in records]
    r = pearson_r(x, y)
    slope, intercept = fit_line(x, y)
    return GeneralizationReport(tuple(records), r, slope, intercept, specs.pop())


def _record_descriptor(rec: dict, spec: DescriptorSpec, base: Path, per_class: int,
                       pooled: bool, seed: int, persistence: PersistenceConfig) -> DescriptorValue:
    sources = [EmbeddingSource.from_dict(dict(s, layer_index=0), base) for s in rec["sources"]]
    groups: Dict[Optional[str], list] = {}
    for s in sources:
        groups.setdefault(s.class_label, []).append(s.load())
    model_key = label_key(str(rec["model_id"]))
    samples = []
    for label in sorted(groups, key=lambda x: "" if x is None else x):
        pts = np.concatenate(groups[label], axis=0)
        if pts.shape[0] > per_class:
            pts = pts[subsample_indices(pts.shape[0], per_class, derive_seed(seed, model_key, label_key(label)))]
        samples.append(pts)
    if pooled:
        return cloud_descriptors(PointCloud(np.concatenate(samples)), [spec], persistence)[0]
    return mean_descriptor([cloud_descriptors(PointCloud(p), [spec], persistence)[0] for p in samples])


def load_records(path, seed: Optional[int] = None) -> Tuple[List[ModelRecord], dict]:
    """Parse a records file.

    Each record carries ``model_id``, ``test_accuracy`` and either a
    precomputed ``descriptor`` (number) or ``sources``: last-layer
    embedding files, one or more per class, from which the descriptor is
    computed on ``examples_per_class`` examples per class and averaged over
    classes (or on the pooled sample with ``"pooled": true``).
    """
    path = Path(path)
    doc = _load_json(path)
    if isinstance(doc, list):
        doc = {"records": doc}
    if not isinstance(doc, dict) or not isinstance(doc.get("records"), list):
        raise LoadError(path, "records file must hold a 'records' list")
    try:
        spec = DescriptorSpec.from_dict(doc.get("spec", {}))
        per_class = int(doc.get("examples_per_class", DEFAULT_EXAMPLES_PER_CLASS))
        pooled = bool(doc.get("pooled", False))
        used_seed = int(doc.get("seed", 0) if seed is None else seed)
        persistence = _persistence_from_dict(doc.get("persistence", {}))
        out = []
        for k, rec in enumerate(doc["records"]):
            if "model_id" not in rec or "test_accuracy" not in rec:
                raise LoadError(path, f"record {k} needs model_id and test_accuracy")
            if "descriptor" in rec:
                d = rec["descriptor"]
                if isinstance(d, dict):
                    value = DescriptorValue(float(d["value"]), d.get("n_intervals", 0), spec)
                else:
                    value = DescriptorValue(float(d), 0, spec)
            elif "sources" in rec:
                value = _record_descriptor(rec, spec, path.parent, per_class, pooled, used_seed, persistence)
            else:
                raise LoadError(path, f"record {k} has neither 'descriptor' nor 'sources'")
            out.append(ModelRecord(str(rec["model_id"]), float(rec["test_accuracy"]), value))
    except (TypeError, AttributeError, KeyError, ValueError) as exc:
        if isinstance(exc, TopoDimError):
            raise
        raise LoadError(path, f"malformed records file: {exc}") from None
    settings = {"examples_per_class": per_class, "pooled": pooled, "seed": used_seed}
    return out, settings
