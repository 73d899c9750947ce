"""Synthetic point clouds with known intrinsic dimension, plus the toy
layer dump and model family used to exercise the pipeline end to end."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError
from .geometry import PointCloud, make_rng

MANIFOLDS = ("segment", "square", "cube", "circle", "sphere")


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def synth(manifold: str, n: int = 1000, dim: Optional[int] = None,
          ambient_dim: Optional[int] = None, seed: int = 0) -> PointCloud:
    """Uniform sample of a manifold with known dimension.

    ``dim`` applies to ``cube`` (default 3) and ``sphere`` (default 2, the
    unit sphere in R^(dim+1)).  ``circle`` is deterministic: n equally spaced
    points on the unit circle.  With ``ambient_dim`` larger than the native
    coordinate count the sample is zero-padded and randomly rotated.
    """
    if manifold not in MANIFOLDS:
        raise InvalidArgumentError(f"unknown manifold {manifold!r}; choose from {', '.join(MANIFOLDS)}")
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    rng = make_rng(seed)
    if manifold == "segment":
        pts = rng.random((n, 1))
    elif manifold == "square":
        pts = rng.random((n, 2))
    elif manifold == "cube":
        pts = rng.random((n, dim or 3))
    elif manifold == "circle":
        theta = 2.0 * np.pi * np.arange(n) / n
        pts = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        g = rng.standard_normal((n, (dim or 2) + 1))
        pts = g / np.linalg.norm(g, axis=1, keepdims=True)
    native = pts.shape[1]
    if ambient_dim is not None and ambient_dim != native:
        if ambient_dim < native:
            raise InvalidArgumentError(f"ambient dimension {ambient_dim} < native dimension {native}")
        padded = np.zeros((n, ambient_dim))
        padded[:, :native] = pts
        pts = padded @ random_rotation(ambient_dim, rng).T
    return PointCloud(pts)


def make_layer_dump(directory, n_layers: int = 3, classes=("a", "b"), n_per_class: int = 120,
                    hw: int = 2, channels: int = 2, seed: int = 0, batch_size: int = 100,
                    batches: int = 2) -> Path:
    """Write 4-D feature-map dumps where layer k pools to a uniform square
    scaled by 1/2**k, and a manifest describing them.  Returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = make_rng(seed)
    sources = []
    for label in classes:
        base = rng.random((n_per_class, channels))
        # spatial jitter that cancels in the mean, so pooling recovers `base`
        # exactly up to the power-of-two layer scale
        jitter = rng.choice([-0.25, 0.25], size=(n_per_class, hw, hw, channels))
        jitter -= jitter.mean(axis=(1, 2), keepdims=True)
        for k in range(n_layers):
            fmap = (base[:, None, None, :] + jitter) * 2.0 ** -k
            path = directory / f"layer{k}_{label}.npy"
            np.save(path, fmap)
            sources.append({"path": path.name, "format": "npy", "layer_index": k, "class_label": label})
    manifest = {
        "sources": sources,
        "descriptors": [{"i": 0, "alpha": 1.0}],
        "phdim": {"i": 0, "alpha": 1.0, "repeats": 2},
        "batch_size": batch_size,
        "batches": batches,
        "seed": seed,
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return path


def make_model_family(n_models: int = 50, noise: float = 0.1, seed: int = 0):
    """(model_id, accuracy, descriptor) triples with accuracy = 0.5 + 0.4 u and
    descriptor = 10 - 8 u + N(0, noise**2), u uniform on [0, 1]."""
    rng = make_rng(seed)
    u = rng.random(n_models)
    acc = 0.5 + 0.4 * u
    desc = 10.0 - 8.0 * u + noise * rng.standard_normal(n_models)
    return [(f"model{j:03d}", float(a), float(d)) for j, (a, d) in enumerate(zip(acc, desc))]


def write_records(path, family, spec: Optional[dict] = None) -> Path:
    path = Path(path)
    doc = {
        "spec": spec or {"i": 0, "alpha": 1.0},
        "records": [{"model_id": m, "test_accuracy": a, "descriptor": d} for m, a, d in family],
    }
    path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return path
