"""Shared test oracles, deliberately independent of the library's own paths."""

import numpy as np
import pytest


def power_iteration_pi(q: np.ndarray, iterations: int = 200) -> np.ndarray:
    """Principal left eigenvector of a stochastic matrix by power iteration.

    Iterates v <- v Q from the uniform vector with L1 renormalization; this is
    the independent oracle for the closed-form row-sum stationary vector.
    """
    n = q.shape[0]
    v = np.full(n, 1.0 / n)
    for _ in range(iterations):
        v = v @ q
        v = v / np.abs(v).sum()
    return v


def brute_force_auc(scores, labels) -> float:
    """Pair-counting AUC: wins count 1, ties 1/2, over all (outlier, inlier) pairs."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    pos = scores[labels]
    neg = scores[~labels]
    total = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                total += 1.0
            elif sp == sn:
                total += 0.5
    return total / (pos.size * neg.size)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
