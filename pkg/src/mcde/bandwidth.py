"""Bandwidth grids and selection procedures.

Three selectors are provided: the normalized negative log-likelihood loss of
the fitted model (the full fit loop), the leave-one-out loss
-sum_i log(kde(x_i) - K(0)/(N h^D)), and k-fold cross-validated KDE.  The
plain KDE log-likelihood is exposed too, mainly to demonstrate its h -> 0
pathology; it is what the cross-validation scores on held-out folds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ._util import as_sample, rng_from_seed
from .errors import (
    AllGridPointsFailed,
    InvalidBandwidth,
    TooFewPoints,
    ZeroDensityAtSamplePoint,
)
from .kernels import Kernel, get_kernel, kernel_constants, kernel_eval

__all__ = [
    "GridSpec",
    "BandwidthGrid",
    "LossCurve",
    "loss_nll",
    "loss_kde_nll",
    "loss_loo",
    "kde_kfold_cv",
    "optimize",
]


@dataclass(frozen=True)
class GridSpec:
    """Bandwidth grid recipe; raw bounds are divided by sqrt(N) when n_scaling
    is on, so the default [1, 100] spans the useful range for any sample size."""

    min_raw: float = 1.0
    max_raw: float = 100.0
    count: int = 20
    log: bool = True
    n_scaling: bool = True

    def resolve(self, n: int) -> "BandwidthGrid":
        if self.count < 1:
            raise ValueError("grid count must be >= 1")
        if self.min_raw <= 0 or self.max_raw <= 0:
            raise InvalidBandwidth("grid bounds must be positive")
        scale = 1.0 / np.sqrt(n) if self.n_scaling else 1.0
        lo, hi = self.min_raw * scale, self.max_raw * scale
        if self.count == 1:
            values = np.array([lo])
        elif not lo < hi:
            raise ValueError("grid needs min < max when count > 1")
        elif self.log:
            values = np.geomspace(lo, hi, self.count)
        else:
            values = np.linspace(lo, hi, self.count)
        return BandwidthGrid(values=values, spec=self)

    def to_dict(self) -> dict:
        return {
            "min": self.min_raw,
            "max": self.max_raw,
            "count": self.count,
            "log": self.log,
            "n_scaling": self.n_scaling,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(
            min_raw=float(d.get("min", 1.0)),
            max_raw=float(d.get("max", 100.0)),
            count=int(d.get("count", 20)),
            log=bool(d.get("log", True)),
            n_scaling=bool(d.get("n_scaling", True)),
        )


@dataclass(frozen=True, eq=False)
class BandwidthGrid:
    """Resolved grid: strictly increasing positive bandwidth values."""

    values: np.ndarray
    spec: GridSpec | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("grid must be a non-empty 1-D array")
        if np.any(v <= 0):
            raise InvalidBandwidth("all grid values must be positive")
        if v.size > 1 and np.any(np.diff(v) <= 0):
            raise ValueError("grid values must be strictly increasing")
        object.__setattr__(self, "values", v)


@dataclass(eq=False)
class LossCurve:
    """Loss per grid point with per-point failure flags; failed points never
    enter the argmin, and ties break toward the smaller bandwidth."""

    h: np.ndarray
    loss: np.ndarray
    failed: np.ndarray
    reasons: list
    argmin_index: int

    @property
    def h_star(self) -> float:
        return float(self.h[self.argmin_index])

    def to_dict(self) -> dict:
        return {
            "h": [float(v) for v in self.h],
            "loss": [None if f else float(v) for v, f in zip(self.loss, self.failed)],
            "failed": [bool(f) for f in self.failed],
            "argmin_index": int(self.argmin_index),
        }


def _curve_from_losses(values: np.ndarray, losses: np.ndarray, reasons: list) -> LossCurve:
    failed = ~np.isfinite(losses)
    if np.all(failed):
        raise AllGridPointsFailed(
            "no bandwidth grid point produced a finite loss: "
            + "; ".join(r for r in reasons if r)[:500]
        )
    masked = np.where(failed, np.inf, losses)
    idx = int(np.argmin(masked))
    return LossCurve(
        h=values,
        loss=np.where(failed, np.nan, losses),
        failed=failed,
        reasons=reasons,
        argmin_index=idx,
    )


def loss_nll(density, sample) -> float:
    """Negative log-likelihood -sum_j log q(x_j) of a normalized density.

    `density` is either a callable evaluated at the sample points or the
    precomputed density values there.
    """
    x = as_sample(sample)
    vals = np.asarray(density(x) if callable(density) else density, dtype=np.float64)
    if vals.shape != (x.shape[0],):
        raise ValueError("density values must be one per sample point")
    if np.any(vals <= 0.0) or not np.all(np.isfinite(vals)):
        raise ZeroDensityAtSamplePoint(
            "density vanishes at a sample point; bandwidth too small"
        )
    return float(-np.log(vals).sum())


def _kde_values(train: np.ndarray, points: np.ndarray, kernel: Kernel, h: float) -> np.ndarray:
    n, d = train.shape
    u = cdist(points, train) / h
    return kernel_eval(kernel, u).sum(axis=1) / (n * h**d)


def loss_kde_nll(sample, kernel: Kernel, h: float, points=None) -> float:
    """Plain KDE negative log-likelihood, optionally on held-out points.

    With points=None this is the self-scored loss whose global minimum sits at
    h = 0, which is why it cannot select a bandwidth by itself.
    """
    x = as_sample(sample)
    if not h > 0:
        raise InvalidBandwidth(f"bandwidth must be positive, got {h}")
    pts = x if points is None else as_sample(points)
    vals = _kde_values(x, pts, kernel, h)
    if np.any(vals <= 0.0) or not np.all(np.isfinite(vals)):
        raise ZeroDensityAtSamplePoint("KDE vanishes at an evaluation point")
    return float(-np.log(vals).sum())


def loss_loo(sample, kernel: Kernel, h: float) -> float:
    """Leave-one-out loss -sum_i log(kde(x_i) - K(0) / (N h^D))."""
    x = as_sample(sample)
    if not h > 0:
        raise InvalidBandwidth(f"bandwidth must be positive, got {h}")
    n, d = x.shape
    k0 = kernel_constants(kernel).k0
    vals = _kde_values(x, x, kernel, h) - k0 / (n * h**d)
    if np.any(vals <= 0.0) or not np.all(np.isfinite(vals)):
        raise ZeroDensityAtSamplePoint(
            "leave-one-out density vanishes at a sample point"
        )
    return float(-np.log(vals).sum())


def _kfold_totals(
    x: np.ndarray, kernel: Kernel, values: np.ndarray, folds: int, seed: int
) -> np.ndarray:
    n, d = x.shape
    perm = rng_from_seed(seed).permutation(n)
    blocks = np.array_split(perm, folds)
    totals = np.zeros(values.size)
    for block in blocks:
        mask = np.ones(n, dtype=bool)
        mask[block] = False
        train = x[mask]
        dist = cdist(x[block], train)
        n_train = train.shape[0]
        for j, h in enumerate(values):
            if not np.isfinite(totals[j]):
                continue
            vals = kernel_eval(kernel, dist / h).sum(axis=1) / (n_train * h**d)
            if np.any(vals <= 0.0) or not np.all(np.isfinite(vals)):
                totals[j] = np.inf
            else:
                totals[j] += -np.log(vals).sum()
    return totals


def kde_kfold_cv(sample, kernel: Kernel, grid, folds: int = 5, seed: int = 0) -> float:
    """Bandwidth minimizing the summed held-out negative log KDE.

    Indices are shuffled once by the seed and split into contiguous blocks;
    ties, as everywhere, go to the smaller bandwidth.
    """
    x = as_sample(sample)
    n = x.shape[0]
    if folds < 2 or n < folds:
        raise TooFewPoints(f"need folds >= 2 and N >= folds, got N={n}, folds={folds}")
    values = grid.values if isinstance(grid, BandwidthGrid) else BandwidthGrid(np.asarray(grid, dtype=np.float64)).values
    totals = _kfold_totals(x, kernel, values, folds, seed)
    if not np.any(np.isfinite(totals)):
        raise AllGridPointsFailed("held-out KDE vanished for every grid bandwidth")
    return float(values[int(np.argmin(totals))])


def optimize(sample, config) -> tuple[float, LossCurve]:
    """Select a bandwidth per config.optimizer: "nll", "loo" or "kde_cv"."""
    x = as_sample(sample)
    method = config.optimizer
    if method == "nll":
        from .estimator import fit_mcde

        model = fit_mcde(x, config)
        return model.h_star, model.loss_curve
    kernel = get_kernel(config.kernel)
    grid = config.h_grid.resolve(x.shape[0])
    if method == "loo":
        losses = np.empty(grid.values.size)
        reasons: list = [None] * grid.values.size
        for i, h in enumerate(grid.values):
            try:
                losses[i] = loss_loo(x, kernel, h)
            except (InvalidBandwidth, ZeroDensityAtSamplePoint) as exc:
                losses[i] = np.nan
                reasons[i] = f"{type(exc).__name__}: {exc}"
        curve = _curve_from_losses(grid.values, losses, reasons)
        return curve.h_star, curve
    if method == "kde_cv":
        totals = _kfold_totals(x, kernel, grid.values, config.cv_folds, config.seed)
        reasons = [
            None if np.isfinite(t) else "ZeroDensityAtSamplePoint: held-out KDE vanished"
            for t in totals
        ]
        curve = _curve_from_losses(
            grid.values, np.where(np.isfinite(totals), totals, np.nan), reasons
        )
        return curve.h_star, curve
    raise ValueError(f"unknown optimizer {method!r}; choose 'nll', 'loo' or 'kde_cv'")
