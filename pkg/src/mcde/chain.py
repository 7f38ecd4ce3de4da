"""Markov chain over a sample: distance, weight and transition matrices.

The chain lives on the sample points and moves with probability proportional
to K(d / h); the movement bias b in [0, 1] scales down the self-transition
weight (b = 1 forbids staying put).  Because the weight matrix is symmetric,
the stationary distribution is proportional to its row sums, which is the
exact production path here; power iteration on the transition matrix exists
only as a test oracle.

Matrices are dense float64 and O(N^2) in memory.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ._util import as_sample
from .errors import EmptySample, InvalidBandwidth, InvalidBias, ZeroRow
from .kernels import Kernel, kernel_eval

__all__ = [
    "distance_matrix",
    "weight_matrix",
    "transition_matrix",
    "stationary_distribution",
]


def distance_matrix(sample, metric: str = "euclidean") -> np.ndarray:
    """Pairwise distances between sample points (symmetric, zero diagonal)."""
    if metric != "euclidean":
        raise ValueError(f"unsupported metric {metric!r}")
    x = as_sample(sample)
    if x.shape[0] < 2:
        raise EmptySample("need at least two points for a distance matrix")
    return cdist(x, x)


def weight_matrix(dist: np.ndarray, kernel: Kernel, h: float, b: float) -> np.ndarray:
    """Symmetric weights W_mn = K(d_mn / h) * (1 - b on the diagonal)."""
    if not h > 0:
        raise InvalidBandwidth(f"bandwidth must be positive, got {h}")
    if not 0.0 <= b <= 1.0:
        raise InvalidBias(f"movement bias must be in [0, 1], got {b}")
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    w = kernel_eval(kernel, d / h)
    w[np.diag_indices_from(w)] *= 1.0 - b
    return w


def _row_sums(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    sums = w.sum(axis=1)
    bad = np.flatnonzero(sums <= 0.0)
    if bad.size:
        raise ZeroRow(
            f"sample point {bad[0]} has zero total weight; "
            "the bandwidth is too small for this kernel/sample"
        )
    return sums


def transition_matrix(weights: np.ndarray) -> np.ndarray:
    """Row-normalize the weights into a right stochastic matrix."""
    sums = _row_sums(weights)
    return np.asarray(weights, dtype=np.float64) / sums[:, None]


def stationary_distribution(weights: np.ndarray) -> np.ndarray:
    """Stationary law of the chain: normalized row sums of the weight matrix."""
    sums = _row_sums(weights)
    return sums / sums.sum()
