"""Deterministic synthetic embeddings and model zoos for desk-scale runs.

Every draw comes from the SplitMix64 stream, so generation is a pure
function of its config: the same seed produces byte-identical EMB1 files
on any platform.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .embeddings import EmbeddingSet
from .errors import ValidationError
from .evaluation import TruthTable
from .rng import SplitMix64

SYNTH_DATASET = "synthetic"
SYNTH_REGIME = "synthetic"
SYNTH_POOL = "synthetic"


def splitmix64_stream(seed: int) -> Iterator[int]:
    """The raw deterministic u64 stream for a seed."""
    rng = SplitMix64(seed)
    while True:
        yield rng.next_u64()


@dataclass(frozen=True)
class ZooConfig:
    """Geometry of a synthetic model pool.

    Model m draws class centroids from N(0, rhos[m]^2 I) and samples from
    N(centroid, noises[m]^2 I); larger rho/noise means an easier, better
    "model".
    """

    models: int
    classes: int
    per_class: int
    dim: int
    rhos: tuple[float, ...]
    noises: tuple[float, ...]
    seed: int

    def __post_init__(self):
        if self.models < 2 or self.classes < 2 or self.per_class < 2 or self.dim < 2:
            raise ValidationError(
                "need models >= 2, classes >= 2, per_class >= 2, dim >= 2"
            )
        if len(self.rhos) != self.models or len(self.noises) != self.models:
            raise ValidationError("rhos and noises must list one value per model")
        if any(r <= 0 for r in self.rhos) or any(s <= 0 for s in self.noises):
            raise ValidationError("rho and noise values must be > 0")


def _draw_points(
    rng: SplitMix64, centroids: np.ndarray, per_class: int, noise: float
) -> np.ndarray:
    classes, dim = centroids.shape
    g = rng.gaussians(classes * per_class * dim).reshape(classes * per_class, dim)
    return np.repeat(centroids, per_class, axis=0) + noise * g


def gen_class_gaussians(
    classes: int,
    per_class: int,
    dim: int,
    rho: float,
    noise: float,
    seed: int,
    model_id: str = "synthetic",
    dataset_id: str = SYNTH_DATASET,
) -> EmbeddingSet:
    """Isotropic Gaussian blobs: centroids from N(0, rho^2 I), then
    per_class points per class from N(centroid, noise^2 I).

    One stream in class-major, dimension-minor order makes the output
    bit-deterministic.
    """
    rng = SplitMix64(seed)
    centroids = rho * rng.gaussians(classes * dim).reshape(classes, dim)
    points = _draw_points(rng, centroids, per_class, noise)
    return EmbeddingSet(
        features=points.astype(np.float32),
        labels=np.repeat(np.arange(classes, dtype=np.int64), per_class),
        class_count=classes,
        model_id=model_id,
        dataset_id=dataset_id,
    )


def nearest_centroid_accuracy(
    train_features: np.ndarray,
    train_labels: np.ndarray,
    test_features: np.ndarray,
    test_labels: np.ndarray,
    class_count: int,
) -> float:
    """Fraction of held-out points whose nearest training-class centroid
    matches their label. Ties go to the lowest class index."""
    tr = np.asarray(train_features, dtype=np.float64)
    te = np.asarray(test_features, dtype=np.float64)
    centroids = np.stack(
        [tr[train_labels == c].mean(axis=0) for c in range(class_count)]
    )
    d2 = (
        np.sum(te * te, axis=1)[:, None]
        - 2.0 * te @ centroids.T
        + np.sum(centroids * centroids, axis=1)
    )
    return float(np.mean(np.argmin(d2, axis=1) == test_labels))


def _gen_one_model(cfg: ZooConfig, m: int) -> tuple[EmbeddingSet, float]:
    rng = SplitMix64(cfg.seed ^ m)
    centroids = cfg.rhos[m] * rng.gaussians(cfg.classes * cfg.dim).reshape(
        cfg.classes, cfg.dim
    )
    train = _draw_points(rng, centroids, cfg.per_class, cfg.noises[m])
    test = _draw_points(rng, centroids, cfg.per_class, cfg.noises[m])
    labels = np.repeat(np.arange(cfg.classes, dtype=np.int64), cfg.per_class)
    ds = EmbeddingSet(
        features=train.astype(np.float32),
        labels=labels,
        class_count=cfg.classes,
        model_id=f"model-{m:02d}",
        dataset_id=SYNTH_DATASET,
    )
    acc = nearest_centroid_accuracy(
        ds.features, labels, test.astype(np.float32), labels, cfg.classes
    )
    return ds, 100.0 * acc


def gen_model_zoo(
    cfg: ZooConfig, jobs: int = 1
) -> tuple[list[EmbeddingSet], TruthTable]:
    """Generate one embedding set per model plus oracle ground truth.

    Model m uses the stream seeded with seed XOR m: centroids, then the
    training draw, then a fresh held-out draw of the same size. Its
    "fine-tuning accuracy" is the held-out nearest-centroid accuracy (in
    percent), stored under the synthetic regime/pool. Models have
    independent streams, so `jobs` > 1 generates them concurrently with
    output identical to the sequential run.
    """
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda m: _gen_one_model(cfg, m),
                                    range(cfg.models)))
    else:
        results = [_gen_one_model(cfg, m) for m in range(cfg.models)]
    sets = [ds for ds, _ in results]
    records = {
        (ds.model_id, SYNTH_DATASET, SYNTH_REGIME, SYNTH_POOL): acc
        for ds, acc in results
    }
    return sets, TruthTable(records=records)
