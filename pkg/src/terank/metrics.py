"""Transferability metrics: logme, gbc, nleep, lda.

Every metric consumes (features, labels) and returns one scalar; higher
means the features fit the labels better. In the scoring pipeline the
input has already been PCA-reduced and perturbed.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from .embeddings import EmbeddingSet
from .errors import DataError, SingletonClassError, ValidationError
from .perturbation import PerturbConfig, sa_perturb
from .rng import SplitMix64

log = logging.getLogger(__name__)

_VAR_FLOOR = 1e-6
_LOG_2PI = math.log(2.0 * math.pi)


class MetricId(str, Enum):
    LOGME = "logme"
    GBC = "gbc"
    NLEEP = "nleep"
    LDA = "lda"


# ---------------------------------------------------------------------------
# logme: maximized Bayesian evidence of a linear model from features to
# one-vs-rest targets

def maximize_evidence(
    features: np.ndarray, targets: np.ndarray
) -> tuple[float, list[float]]:
    """Maximize the log evidence of y = Fw + noise over the precisions.

    Isotropic Gaussian prior precision `a` and noise precision `b`, both
    initialized at 1, are iterated with the classic fixed point

        g = sum_i b s_i^2 / (a + b s_i^2)
        a <- g / ||m||^2,   b <- (N - g) / ||Fm - y||^2

    over the squared singular values s_i^2 of F, until the relative
    change of both precisions drops below 1e-3 (at most 100 updates).
    Returns the final log evidence and its per-iteration trace, which is
    non-decreasing.
    """
    f = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    n, k = f.shape
    u, s, _ = np.linalg.svd(f, full_matrices=False)
    return _evidence_fixed_point(s**2, u.T @ y, float(y @ y), n, k)


def _evidence_fixed_point(
    s2: np.ndarray, z: np.ndarray, ysq: float, n: int, k: int
) -> tuple[float, list[float]]:
    zsq = z**2
    resid_base = max(ysq - float(zsq.sum()), 0.0)
    m = s2.shape[0]

    def state(a: float, b: float) -> tuple[float, float, float, float]:
        denom = a + b * s2
        gamma = float(b * np.sum(s2 / denom))
        msq = float(b * b * np.sum(s2 * zsq / denom**2))
        res = float(np.sum((a / denom) ** 2 * zsq)) + resid_base
        ev = 0.5 * (
            k * math.log(a)
            + n * math.log(b)
            - float(np.sum(np.log(denom)))
            - (k - m) * math.log(a)
            - b * res
            - a * msq
            - n * _LOG_2PI
        )
        return ev, gamma, msq, res

    a = b = 1.0
    trace: list[float] = []
    for _ in range(100):
        ev, gamma, msq, res = state(a, b)
        trace.append(ev)
        a_new = gamma / msq if msq > 1e-300 else a
        b_new = (n - gamma) / res if res > 1e-300 else b
        if not (math.isfinite(a_new) and math.isfinite(b_new)):
            break
        rel = max(abs(a_new - a) / a, abs(b_new - b) / b)
        a, b = a_new, b_new
        if rel < 1e-3:
            break
    ev, _, _, _ = state(a, b)
    trace.append(ev)
    return ev, trace


def score_logme(ds: EmbeddingSet) -> float:
    """Mean over classes of the maximized one-vs-rest log evidence per
    sample. The SVD of the feature matrix is shared across classes."""
    f = np.asarray(ds.features, dtype=np.float64)
    n, k = f.shape
    u, s, _ = np.linalg.svd(f, full_matrices=False)
    s2 = s**2
    total = 0.0
    for c in range(ds.class_count):
        y = (ds.labels == c).astype(np.float64)
        ev, _ = _evidence_fixed_point(s2, u.T @ y, float(y @ y), n, k)
        total += ev / n
    return total / ds.class_count


# ---------------------------------------------------------------------------
# gbc: negative sum of pairwise Bhattacharyya coefficients between
# class-conditional diagonal Gaussians

def score_gbc(ds: EmbeddingSet) -> float:
    """- sum over class pairs of exp(-Bhattacharyya distance).

    Per-class Gaussians are diagonal with variances floored at 1e-6.
    0 means no overlap anywhere; -C(C-1)/2 means total overlap.
    """
    x = np.asarray(ds.features, dtype=np.float64)
    c = ds.class_count
    means = np.empty((c, x.shape[1]))
    variances = np.empty((c, x.shape[1]))
    for u_cls in range(c):
        pts = x[ds.labels == u_cls]
        if pts.shape[0] < 2:
            raise SingletonClassError(
                f"class {u_cls} has a single sample; gbc needs per-class variance"
            )
        means[u_cls] = pts.mean(axis=0)
        variances[u_cls] = np.maximum(pts.var(axis=0), _VAR_FLOOR)

    mdiff2 = (means[:, None, :] - means[None, :, :]) ** 2
    vbar = (variances[:, None, :] + variances[None, :, :]) / 2.0
    term_mean = 0.125 * np.sum(mdiff2 / vbar, axis=2)
    term_var = 0.5 * np.sum(
        np.log(vbar / np.sqrt(variances[:, None, :] * variances[None, :, :])), axis=2
    )
    d_b = term_mean + term_var
    iu = np.triu_indices(c, k=1)
    return float(-np.sum(np.exp(-d_b[iu])))


# ---------------------------------------------------------------------------
# gmm + nleep

@dataclass(frozen=True)
class GmmModel:
    """Diagonal-covariance Gaussian mixture fit by EM."""

    weights: np.ndarray  # (K,), sums to 1
    means: np.ndarray  # (K, k)
    variances: np.ndarray  # (K, k), floored
    responsibilities: np.ndarray  # (N, K), input row order
    log_likelihood_trace: tuple[float, ...]


def _log_gaussian_prob(x, means, variances):
    # log N(x | mu_j, diag(var_j)) for every (sample, component)
    inv = 1.0 / variances
    quad = (
        (x * x) @ inv.T
        - 2.0 * (x @ (means * inv).T)
        + np.sum(means * means * inv, axis=1)
    )
    return -0.5 * (x.shape[1] * _LOG_2PI + np.sum(np.log(variances), axis=1) + quad)


def _kmeanspp_centers(xs: np.ndarray, k: int, rng: SplitMix64) -> np.ndarray:
    # classic D^2-weighted seeding; xs must already be in canonical order
    n = xs.shape[0]
    centers = np.empty((k, xs.shape[1]))
    centers[0] = xs[int(rng.uniform() * n)]
    d2 = np.sum((xs - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            idx = int(rng.uniform() * n)
        else:
            r = rng.uniform() * total
            idx = min(int(np.searchsorted(np.cumsum(d2), r, side="right")), n - 1)
        centers[j] = xs[idx]
        d2 = np.minimum(d2, np.sum((xs - centers[j]) ** 2, axis=1))
    return centers


def fit_gmm(features: np.ndarray, components: int, seed: int) -> GmmModel:
    """EM with diagonal covariances, variance floor 1e-6, and D^2-weighted
    seeding driven by the SplitMix64 stream for `seed`.

    Stops when the relative log-likelihood change falls below 1e-4 or
    after 200 iterations; the likelihood trace is non-decreasing. The
    same seed yields bit-identical parameters, and the fit does not
    depend on the row order of `features`: seeding and accumulation both
    run over a canonical (lexicographically sorted) view of the data.
    """
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    if components < 1:
        raise ValidationError(f"component count must be >= 1, got {components}")
    if components > n:
        raise DataError(f"cannot fit {components} components to {n} samples")

    order = np.lexsort(x.T[::-1])
    xs = x[order]
    means = _kmeanspp_centers(xs, components, SplitMix64(seed))
    variances = np.tile(np.maximum(xs.var(axis=0), _VAR_FLOOR), (components, 1))
    weights = np.full(components, 1.0 / components)

    trace: list[float] = []
    resp_sorted = np.full((n, components), 1.0 / components)
    for _ in range(200):
        # E-step
        log_joint = _log_gaussian_prob(xs, means, variances) + np.log(weights)
        log_norm = logsumexp(log_joint, axis=1)
        resp_sorted = np.exp(log_joint - log_norm[:, None])
        ll = float(log_norm.sum())
        if trace and abs(ll - trace[-1]) / max(abs(trace[-1]), 1e-12) < 1e-4:
            trace.append(ll)
            break
        trace.append(ll)
        # M-step; components that lost all responsibility keep their
        # previous parameters
        nk = resp_sorted.sum(axis=0)
        alive = nk > 1e-12
        weights = nk / n
        new_means = means.copy()
        new_vars = variances.copy()
        new_means[alive] = (resp_sorted.T[alive] @ xs) / nk[alive, None]
        ex2 = (resp_sorted.T[alive] @ (xs * xs)) / nk[alive, None]
        new_vars[alive] = np.maximum(ex2 - new_means[alive] ** 2, _VAR_FLOOR)
        means, variances = new_means, new_vars

    resp = np.empty_like(resp_sorted)
    resp[order] = resp_sorted
    return GmmModel(
        weights=weights,
        means=means,
        variances=variances,
        responsibilities=resp,
        log_likelihood_trace=tuple(trace),
    )


def nleep_from_responsibilities(
    resp: np.ndarray, labels: np.ndarray, class_count: int
) -> float:
    """Mean log expected empirical prediction given mixture posteriors.

    Components with total responsibility below 1e-12 are dropped (logged)
    before the empirical conditional P(y | component) is formed.
    """
    col_total = resp.sum(axis=0)
    keep = col_total >= 1e-12
    if not keep.all():
        log.info("dropping %d empty mixture components", int((~keep).sum()))
        resp = resp[:, keep]
        col_total = col_total[keep]
    onehot = np.zeros((class_count, resp.shape[0]))
    onehot[labels, np.arange(resp.shape[0])] = 1.0
    cond = (onehot @ resp) / col_total  # P(y | v), shape (C, K')
    per_sample = np.einsum("nk,nk->n", cond[labels], resp)
    return float(np.mean(np.log(np.maximum(per_sample, 1e-300))))


def score_nleep(
    ds: EmbeddingSet, components: int | None = None, seed: int = 0
) -> float:
    """Fit a GMM (component count defaults to the class count) and return
    the soft LEEP-style score. Always <= 0."""
    k = components if components is not None else ds.class_count
    gmm = fit_gmm(ds.features, k, seed)
    return nleep_from_responsibilities(gmm.responsibilities, ds.labels, ds.class_count)


# ---------------------------------------------------------------------------
# lda: mean softmax probability of the true class under discriminant
# scores in the regularized discriminant projection

@dataclass(frozen=True)
class LdaConfig:
    # ridge added to the within-class scatter, as a fraction of its mean
    # diagonal; relative scaling survives feature rescaling
    epsilon_scale: float = 1e-4
    projection_rank: int | None = None  # default min(C-1, k)

    def __post_init__(self):
        if self.epsilon_scale <= 0:
            raise ValidationError(
                f"epsilon_scale must be > 0, got {self.epsilon_scale}"
            )
        if self.projection_rank is not None and self.projection_rank < 1:
            raise ValidationError("projection_rank must be >= 1")


def score_lda(ds: EmbeddingSet, cfg: LdaConfig | None = None) -> float:
    """Mean softmax probability of each sample's true class.

    Discriminant directions solve the generalized eigenproblem of the
    between-class scatter against the ridged within-class scatter; each
    eigenvector v is normalized so v' (S_w + eps I) v = 1. The per-class
    score of a sample f is f' U U' mu_c - mu_c' U U' mu_c / 2 + log prior.
    Always in [0, 1].
    """
    cfg = cfg or LdaConfig()
    x = np.asarray(ds.features, dtype=np.float64)
    n, k = x.shape
    c = ds.class_count

    counts = np.bincount(ds.labels, minlength=c).astype(np.float64)
    if (counts < 2).any():
        bad = int(np.flatnonzero(counts < 2)[0])
        raise SingletonClassError(
            f"class {bad} has a single sample; lda needs per-class scatter"
        )
    grand_mean = x.mean(axis=0)
    means = np.empty((c, k))
    scatter_within = np.zeros((k, k))
    for cls in range(c):
        pts = x[ds.labels == cls]
        means[cls] = pts.mean(axis=0)
        centered = pts - means[cls]
        scatter_within += centered.T @ centered
    offset = means - grand_mean
    scatter_between = (offset * counts[:, None]).T @ offset

    eps = cfg.epsilon_scale * float(np.trace(scatter_within)) / k
    if eps <= 0.0:
        eps = cfg.epsilon_scale
    rank = cfg.projection_rank if cfg.projection_rank is not None else min(c - 1, k)
    rank = min(rank, k)
    _, vecs = scipy.linalg.eigh(scatter_between, scatter_within + eps * np.eye(k))
    # top eigenvalues; scaled so the projected within-class covariance is
    # the identity (the discriminant assumes unit-variance classes), which
    # also sends U -> 0 as the ridge grows
    u = vecs[:, ::-1][:, :rank] * math.sqrt(n)

    proj_means = means @ (u @ u.T)  # (C, k)
    delta = x @ proj_means.T  # f' U U' mu_c
    delta += -0.5 * np.einsum("ck,ck->c", means, proj_means) + np.log(counts / n)
    delta -= delta.max(axis=1, keepdims=True)
    probs = np.exp(delta)
    probs /= probs.sum(axis=1, keepdims=True)
    return float(np.mean(probs[np.arange(n), ds.labels]))


# ---------------------------------------------------------------------------
# uniform scoring front end

@dataclass(frozen=True)
class ScoreRecord:
    """One transferability score and the wall time it took to compute."""

    model_id: str
    dataset_id: str
    metric: str
    mode: str
    perturbed: bool
    score: float
    wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "model": self.model_id,
            "dataset": self.dataset_id,
            "metric": self.metric,
            "mode": self.mode,
            "perturbed": self.perturbed,
            "score": self.score,
            "wall_time_s": self.wall_time_s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreRecord":
        return cls(
            model_id=d["model"],
            dataset_id=d["dataset"],
            metric=d["metric"],
            mode=d["mode"],
            perturbed=d["perturbed"],
            score=d["score"],
            wall_time_s=d["wall_time_s"],
        )


def score_metric(
    ds: EmbeddingSet,
    metric: MetricId,
    seed: int = 0,
    nleep_components: int | None = None,
    lda_config: LdaConfig | None = None,
) -> float:
    """Apply one metric to an (already reduced/perturbed) embedding set."""
    metric = MetricId(metric)
    if metric is MetricId.LOGME:
        return score_logme(ds)
    if metric is MetricId.GBC:
        return score_gbc(ds)
    if metric is MetricId.NLEEP:
        return score_nleep(ds, components=nleep_components, seed=seed)
    return score_lda(ds, cfg=lda_config)


def score_model(
    raw: EmbeddingSet,
    metric: MetricId,
    perturb: PerturbConfig | None = None,
    energy: float | None = None,
    rank: int | None = None,
    seed: int = 0,
    nleep_components: int | None = None,
    lda_config: LdaConfig | None = None,
) -> ScoreRecord:
    """Score one model's raw embeddings: reduce, perturb, apply metric.

    The wall time covers the whole pipeline so perturbed and baseline
    runs can be compared for overhead.
    """
    perturb = perturb or PerturbConfig()
    start = time.perf_counter()
    prepared = sa_perturb(raw, perturb, energy=energy, rank=rank)
    value = score_metric(
        prepared,
        metric,
        seed=seed,
        nleep_components=nleep_components,
        lda_config=lda_config,
    )
    elapsed = time.perf_counter() - start
    return ScoreRecord(
        model_id=raw.model_id,
        dataset_id=raw.dataset_id,
        metric=MetricId(metric).value,
        mode=perturb.mode.value,
        perturbed=perturb.mode.value != "none",
        score=float(value),
        wall_time_s=elapsed,
    )
