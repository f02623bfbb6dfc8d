"""Spread and attract feature perturbations in the PCA-reduced space.

Spread pushes every sample one unit away from its class centroid,
inflating intra-class variance. Attract then translates each class as a
rigid body according to how far its centroid gaps to the other classes
sit from the equilibrium separation sigma * (R_u + R_v).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .embeddings import EmbeddingSet
from .errors import ValidationError
from .reduction import fit_pca, transform

log = logging.getLogger(__name__)

_DEGENERATE_NORM = 1e-12


class PerturbMode(str, Enum):
    NONE = "none"
    SPREAD = "spread"
    ATTRACT = "attract"
    SA = "sa"


class AttractDirection(str, Enum):
    # TOWARD moves a class toward its neighbours whenever their centroid
    # gap exceeds the equilibrium separation (and away when they overlap),
    # shrinking inter-class margins. LITERAL keeps the opposite sign
    # convention for strict textual fidelity with the printed update rule.
    TOWARD = "toward"
    LITERAL = "literal"


@dataclass(frozen=True)
class PerturbConfig:
    alpha: float = 0.005
    sigma: float = 0.6
    mode: PerturbMode = PerturbMode.SA
    attract_direction: AttractDirection = AttractDirection.TOWARD

    def __post_init__(self):
        if self.alpha < 0:
            raise ValidationError(f"alpha must be >= 0, got {self.alpha}")
        if self.sigma < 0:
            raise ValidationError(f"sigma must be >= 0, got {self.sigma}")
        object.__setattr__(self, "mode", PerturbMode(self.mode))
        object.__setattr__(
            self, "attract_direction", AttractDirection(self.attract_direction)
        )


@dataclass(frozen=True)
class ClassGeometry:
    """Per-class centroids and RMS radii, snapshotted before any move."""

    centroids: np.ndarray  # (C, k)
    radii: np.ndarray  # (C,)


def class_centroid(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValidationError("centroid needs a non-empty 2-D point array")
    return points.mean(axis=0)


def class_radius(points: np.ndarray, centroid: np.ndarray) -> float:
    """Root-mean-square distance to the centroid.

    Equals the Euclidean norm of the per-dimension population standard
    deviations when the centroid is the mean of the points.
    """
    points = np.asarray(points, dtype=np.float64)
    diff = points - np.asarray(centroid, dtype=np.float64)
    return float(np.sqrt(np.mean(np.sum(diff * diff, axis=1))))


def class_geometry(ds: EmbeddingSet) -> ClassGeometry:
    x = np.asarray(ds.features, dtype=np.float64)
    cents = np.empty((ds.class_count, x.shape[1]))
    radii = np.empty(ds.class_count)
    for c in range(ds.class_count):
        pts = x[ds.labels == c]
        cents[c] = pts.mean(axis=0)
        radii[c] = class_radius(pts, cents[c])
    return ClassGeometry(centroids=cents, radii=radii)


def spread(ds: EmbeddingSet) -> EmbeddingSet:
    """Displace every sample one unit along its ray from the class
    centroid. Samples sitting on their centroid have no defined ray and
    are left unchanged."""
    x = np.asarray(ds.features, dtype=np.float64)
    cents = class_geometry(ds).centroids
    diff = x - cents[ds.labels]
    norms = np.linalg.norm(diff, axis=1)
    moved = norms > _DEGENERATE_NORM
    out = x.copy()
    out[moved] += diff[moved] / norms[moved, None]
    return ds.with_features(out)


def attract(
    ds: EmbeddingSet, geometry: ClassGeometry, cfg: PerturbConfig
) -> EmbeddingSet:
    """Translate each class rigidly by alpha times its net displacement.

    The displacement of class u sums, over every other class v, the unit
    centroid direction scaled by (‖C_u - C_v‖ - sigma*(R_u + R_v)).
    Pairs with coincident centroids contribute nothing (warned, not an
    error). Centroids and radii come from the snapshot in `geometry`, so
    no class sees another's updated position.
    """
    cents = geometry.centroids
    radii = geometry.radii
    c = cents.shape[0]
    if c != ds.class_count:
        raise ValidationError("geometry does not match the embedding set")

    diffs = cents[:, None, :] - cents[None, :, :]  # (u, v) -> C_u - C_v
    dist = np.linalg.norm(diffs, axis=2)
    off_diag = ~np.eye(c, dtype=bool)
    usable = off_diag & (dist > _DEGENERATE_NORM)

    coincident = np.argwhere(off_diag & ~usable)
    for u, v in coincident:
        if u < v:
            log.warning(
                "classes %d and %d have coincident centroids; pair skipped", u, v
            )

    gap = dist - cfg.sigma * (radii[:, None] + radii[None, :])
    safe_dist = np.where(usable, dist, 1.0)
    units = diffs / safe_dist[:, :, None]
    if cfg.attract_direction is AttractDirection.TOWARD:
        units = -units
    weights = np.where(usable, gap, 0.0)
    disp = np.einsum("uvk,uv->uk", units, weights)

    x = np.asarray(ds.features, dtype=np.float64)
    return ds.with_features(x + cfg.alpha * disp[ds.labels])


def sa_perturb(
    raw: EmbeddingSet,
    cfg: PerturbConfig,
    energy: float | None = None,
    rank: int | None = None,
) -> EmbeddingSet:
    """Full pipeline: PCA-reduce, then spread and/or attract per cfg.mode.

    mode=none returns just the reduced set (the unperturbed baseline).
    For mode=sa the attract geometry is computed on the spread set.
    """
    reduced = transform(fit_pca(raw, energy=energy, rank=rank), raw)
    if cfg.mode is PerturbMode.NONE:
        return reduced
    if cfg.mode is PerturbMode.SPREAD:
        return spread(reduced)
    if cfg.mode is PerturbMode.ATTRACT:
        return attract(reduced, class_geometry(reduced), cfg)
    spread_set = spread(reduced)
    return attract(spread_set, class_geometry(spread_set), cfg)
