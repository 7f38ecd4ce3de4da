"""Whitening and boundary-bias remedies.

Whitening maps the sample to zero mean and identity covariance through the
inverse symmetric square root of the (unbiased) covariance, so Euclidean
distances treat all directions equally.  Boundary handling offers reflection
doubling at a single lower boundary and log/logit variable transforms; any
Jacobian correction of the resulting density is the caller's responsibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import as_sample
from .errors import (
    DimensionMismatch,
    DomainViolation,
    PointBelowBoundary,
    SingularCovariance,
)

__all__ = ["WhiteningTransform", "whiten", "reflect_boundary", "transform_variable"]

# Eigenvalues below this fraction of the largest are treated as singular.
_EIG_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class WhiteningTransform:
    """Affine map y = transform @ (x - mean) with its exact inverse."""

    mean: np.ndarray
    transform: np.ndarray
    inverse: np.ndarray

    def apply(self, points) -> np.ndarray:
        return (as_sample(points) - self.mean) @ self.transform.T

    def unapply(self, points) -> np.ndarray:
        return as_sample(points) @ self.inverse.T + self.mean

    @property
    def jacobian_det(self) -> float:
        """det(transform); the constant density Jacobian of the map."""
        return float(np.linalg.det(self.transform))


def whiten(sample) -> tuple[np.ndarray, WhiteningTransform]:
    """Transform the sample to zero mean and identity covariance.

    Uses the symmetric eigendecomposition of the N-1-normalized covariance;
    eigenvalues are ordered descending and each eigenvector's sign is fixed by
    making its largest-magnitude component positive, so the stored factors are
    reproducible.  Raises SingularCovariance for degenerate/collinear data.
    """
    x = as_sample(sample)
    n, d = x.shape
    if n <= d:
        raise SingularCovariance(f"need more than D={d} points to whiten, got N={n}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    if evals[0] <= 0.0 or evals[-1] < _EIG_RTOL * evals[0]:
        raise SingularCovariance(
            f"covariance eigenvalue {evals[-1]:.3e} below {_EIG_RTOL:g} of the largest"
        )
    for j in range(d):
        i = int(np.argmax(np.abs(evecs[:, j])))
        if evecs[i, j] < 0:
            evecs[:, j] = -evecs[:, j]
    transform = (evecs * evals**-0.5) @ evecs.T
    inverse = (evecs * evals**0.5) @ evecs.T
    wt = WhiteningTransform(mean=mean, transform=transform, inverse=inverse)
    return wt.apply(x), wt


def reflect_boundary(sample, boundary: float, side: str = "lower") -> np.ndarray:
    """Double a 1-D sample by mirroring it across a lower boundary."""
    if side != "lower":
        raise ValueError(f"unsupported side {side!r}")
    x = as_sample(sample)
    if x.shape[1] != 1:
        raise DimensionMismatch("boundary reflection requires a 1-D sample")
    if np.any(x[:, 0] < boundary):
        raise PointBelowBoundary(f"sample contains points below the boundary {boundary}")
    return np.vstack([x, 2.0 * boundary - x])


def transform_variable(sample, kind: str) -> np.ndarray:
    """Elementwise log or logit transform of a 1-D sample."""
    x = as_sample(sample)
    if x.shape[1] != 1:
        raise DimensionMismatch("variable transforms require a 1-D sample")
    if kind == "log":
        if np.any(x <= 0.0):
            raise DomainViolation("log transform requires all points > 0")
        return np.log(x)
    if kind == "logit":
        if np.any(x <= 0.0) or np.any(x >= 1.0):
            raise DomainViolation("logit transform requires all points in (0, 1)")
        return np.log(x / (1.0 - x))
    raise ValueError(f"unknown transform {kind!r}; choose 'log' or 'logit'")
