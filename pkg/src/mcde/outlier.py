"""Local density-based anomaly scoring and ranking-quality evaluation.

A point's score is the mean estimated density of its k nearest neighbors
divided by its own density, so any global rescaling of the density cancels:
the detector works directly on the unnormalized stationary values at the
fitted bandwidth.  Ranking quality is the Mann-Whitney AUC with ties counted
half.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata

from . import preprocess
from ._util import as_sample
from .errors import DegenerateLabels, KOutOfRange
from .estimator import FitConfig, fit_mcde

__all__ = ["OutlierReport", "knn", "anomaly_scores", "auc", "detect"]


@dataclass(eq=False)
class OutlierReport:
    """Per-point anomaly scores plus the AUC when labels are known."""

    scores: np.ndarray
    k: int
    labels: np.ndarray | None = None
    auc: float | None = None
    h_star: float | None = None


def _neighbors_from_dist(dist: np.ndarray, k: int) -> np.ndarray:
    d = dist.copy()
    np.fill_diagonal(d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")
    return order[:, :k]


def knn(sample, k: int) -> np.ndarray:
    """Exact k nearest neighbors per point (self excluded).

    Returns an (N, k) index array, rows ordered by ascending distance with
    ties broken toward the lower index.
    """
    x = as_sample(sample)
    n = x.shape[0]
    if not 1 <= k <= n - 1:
        raise KOutOfRange(f"k must satisfy 1 <= k <= N-1 = {n - 1}, got {k}")
    return _neighbors_from_dist(cdist(x, x), k)


def anomaly_scores(density_values, neighbors: np.ndarray) -> np.ndarray:
    """Scores S_k(x_i) = mean neighbor density / own density.

    A zero own density with positive neighbor mean scores +inf (maximally
    anomalous); 0/0 scores 1 with a warning.
    """
    dens = np.asarray(density_values, dtype=np.float64)
    if np.any(dens < 0) or not np.all(np.isfinite(dens)):
        raise ValueError("density values must be finite and non-negative")
    nbr_mean = dens[neighbors].mean(axis=1)
    scores = np.empty_like(dens)
    positive = dens > 0
    scores[positive] = nbr_mean[positive] / dens[positive]
    zero = ~positive
    scores[zero & (nbr_mean > 0)] = np.inf
    both_zero = zero & (nbr_mean == 0)
    if np.any(both_zero):
        warnings.warn(
            f"{int(both_zero.sum())} points with zero density and zero neighbor mean; "
            "score set to 1",
            stacklevel=2,
        )
        scores[both_zero] = 1.0
    return scores


def auc(scores, labels) -> float:
    """Probability a random outlier outranks a random inlier, ties at half.

    Computed from midranks (Mann-Whitney); +inf scores rank above all finite
    ones.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-D arrays of equal length")
    if np.any(np.isnan(s)):
        raise ValueError("scores must not contain NaN")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("need at least one outlier and one inlier label")
    ranks = rankdata(s, method="average")
    rank_sum = float(ranks[y].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _scores_by_k(points_white: np.ndarray, density: np.ndarray, ks) -> dict[int, np.ndarray]:
    """Scores for several k from one neighbor scan (lists are prefix-stable)."""
    n = points_white.shape[0]
    k_max = max(int(k) for k in ks)
    if not 1 <= min(int(k) for k in ks) or not k_max <= n - 1:
        raise KOutOfRange(f"every k must satisfy 1 <= k <= N-1 = {n - 1}")
    neighbors = _neighbors_from_dist(cdist(points_white, points_white), k_max)
    return {int(k): anomaly_scores(density, neighbors[:, :k]) for k in ks}


def detect(
    sample,
    k: int,
    config: FitConfig | None = None,
    *,
    labels=None,
    whiten: bool = True,
    threads: int = 1,
) -> OutlierReport:
    """Whiten, fit the bandwidth by the NLL loop, then score every point.

    Scores use the unnormalized pointwise values at h*, which give exactly the
    same ranking as the normalized density.
    """
    x = as_sample(sample)
    config = config or FitConfig()
    transform = None
    xw = x
    if whiten:
        xw, transform = preprocess.whiten(x)
    model = fit_mcde(xw, config, threads=threads, whitening=transform)
    scores = _scores_by_k(xw, model.pointwise.values, [k])[int(k)]
    auc_value = None
    label_arr = None
    if labels is not None:
        label_arr = np.asarray(labels, dtype=bool)
        auc_value = auc(scores, label_arr)
    return OutlierReport(
        scores=scores, k=int(k), labels=label_arr, auc=auc_value, h_star=model.h_star
    )
