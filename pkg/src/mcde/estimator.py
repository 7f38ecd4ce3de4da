"""Density estimation from the chain's stationary values.

The pointwise estimate at a sample point is kde(x_i) - b K(0) / (N h^D),
i.e. the stationary weight of the chain up to the common normalization; b = 0
recovers plain KDE and b = 1 its leave-one-out form.  Fitting extends these
values to a function on R^D (linear interpolation in 1-D, nearest-neighbor
otherwise, or a KDE-based extension for the "f1" variant), normalizes it by
Monte Carlo over the sample bounding box, and picks the bandwidth minimizing
the negative log-likelihood of the normalized density over a grid.

Kernels are always evaluated as K(d/h); the 1/h^D prefactor appears only
where the absolute KDE scale matters, never inside the chain weights, which
keeps high-dimensional fits clear of underflow.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ._util import as_points, as_sample, nearest_anchor_indices, rng_from_seed
from .bandwidth import GridSpec, LossCurve, loss_nll
from .errors import (
    AllGridPointsFailed,
    DegenerateDomain,
    DimensionMismatch,
    EmptySample,
    InvalidBandwidth,
    InvalidBias,
    ZeroDensityAtSamplePoint,
)
from .kernels import Kernel, get_kernel, kernel_constants, kernel_eval
from .preprocess import WhiteningTransform

__all__ = [
    "DomainBox",
    "PointwiseEstimate",
    "Interpolant",
    "FitConfig",
    "DensityModel",
    "kde_evaluate",
    "pointwise_estimate",
    "build_interpolant",
    "f1_evaluate",
    "mc_normalize",
    "fit_mcde",
    "normalization_constant_diagnostic",
    "model_to_dict",
    "model_from_dict",
]

MC_SAMPLES_MIN = 10_000
_INTERP_METHODS = ("piecewise_linear_1d", "nearest_neighbor")


@dataclass(frozen=True, eq=False)
class DomainBox:
    """Axis-aligned box; densities are cut to zero outside it."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=np.float64))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be 1-D arrays of equal length")
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi in every dimension")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_points(cls, points) -> "DomainBox":
        x = as_sample(points)
        return cls(lo=x.min(axis=0), hi=x.max(axis=0))

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.all((points >= self.lo) & (points <= self.hi), axis=1)


@dataclass(frozen=True, eq=False)
class PointwiseEstimate:
    """Unnormalized estimate at the sample points.

    values holds kde(x_i) - b K(0) / (N h^D) clamped at zero; n_clamped counts
    how many points the clamp actually touched.
    """

    values: np.ndarray
    h: float
    b: float
    kernel: Kernel
    d: int
    n_clamped: int = 0


class Interpolant:
    """Interpolates anchor values over the domain box, zero outside.

    piecewise_linear_1d joins the order statistics of a 1-D sample; the
    nearest_neighbor method returns the value of the closest anchor with ties
    broken toward the lowest index.
    """

    def __init__(self, method: str, anchors: np.ndarray, values: np.ndarray, domain: DomainBox):
        if method not in _INTERP_METHODS:
            raise ValueError(f"unknown interpolation method {method!r}")
        self.method = method
        self.anchors = anchors
        self.values = values
        self.domain = domain
        if method == "piecewise_linear_1d":
            order = np.argsort(anchors[:, 0], kind="stable")
            self._xs = anchors[order, 0]
            self._ys = values[order]

    def __call__(self, points):
        pts, scalar = as_points(points, self.anchors.shape[1])
        out = np.zeros(pts.shape[0])
        inside = self.domain.contains(pts)
        if np.any(inside):
            if self.method == "piecewise_linear_1d":
                out[inside] = np.interp(pts[inside, 0], self._xs, self._ys)
            else:
                idx = nearest_anchor_indices(pts[inside], self.anchors)
                out[inside] = self.values[idx]
        return float(out[0]) if scalar else out


def _check_h_b(h: float, b: float):
    if not h > 0:
        raise InvalidBandwidth(f"bandwidth must be positive, got {h}")
    if not 0.0 <= b <= 1.0:
        raise InvalidBias(f"movement bias must be in [0, 1], got {b}")


def kde_evaluate(sample, kernel: Kernel, h: float, x):
    """Kernel density estimate (1 / (N h^D)) sum_n K(d(x, x_n) / h)."""
    pts_train = as_sample(sample)
    if not h > 0:
        raise InvalidBandwidth(f"bandwidth must be positive, got {h}")
    n, d = pts_train.shape
    pts, scalar = as_points(x, d)
    vals = kernel_eval(kernel, cdist(pts, pts_train) / h).sum(axis=1) / (n * h**d)
    return float(vals[0]) if scalar else vals


def _pointwise_from_dist(
    dist: np.ndarray, kernel: Kernel, h: float, b: float, d: int
) -> tuple[np.ndarray, int]:
    n = dist.shape[0]
    scale = n * h**d
    kde_vals = kernel_eval(kernel, dist / h).sum(axis=1) / scale
    raw = kde_vals - b * kernel_constants(kernel).k0 / scale
    n_clamped = int(np.count_nonzero(raw < 0.0))
    return np.maximum(raw, 0.0), n_clamped


def pointwise_estimate(sample, kernel: Kernel, h: float, b: float) -> PointwiseEstimate:
    """Unnormalized estimate kde(x_i) - b K(0) / (N h^D) at every sample point."""
    x = as_sample(sample)
    _check_h_b(h, b)
    values, n_clamped = _pointwise_from_dist(cdist(x, x), kernel, h, b, x.shape[1])
    return PointwiseEstimate(
        values=values, h=float(h), b=float(b), kernel=kernel, d=x.shape[1], n_clamped=n_clamped
    )


def build_interpolant(sample, values, method: str) -> Interpolant:
    """Interpolant through (sample point, value) anchors on the sample box."""
    x = as_sample(sample)
    vals = np.asarray(values, dtype=np.float64)
    if vals.shape != (x.shape[0],):
        raise ValueError("need exactly one value per anchor point")
    if not np.all(np.isfinite(vals)):
        raise ValueError("anchor values must be finite")
    if method == "piecewise_linear_1d" and x.shape[1] != 1:
        raise DimensionMismatch("piecewise linear interpolation requires D = 1")
    return Interpolant(method, x, vals, DomainBox.from_points(x))


def f1_evaluate(sample, kernel: Kernel, h: float, b: float, x):
    """KDE-based domain extension: max(kde(x) - b K(0) / (N h^D), 0)."""
    pts_train = as_sample(sample)
    _check_h_b(h, b)
    n, d = pts_train.shape
    vals = kde_evaluate(pts_train, kernel, h, x)
    threshold = b * kernel_constants(kernel).k0 / (n * h**d)
    return np.maximum(vals - threshold, 0.0) if isinstance(vals, np.ndarray) else max(
        vals - threshold, 0.0
    )


def mc_normalize(density, domain: DomainBox, m: int, seed: int) -> tuple[float, float]:
    """Monte Carlo integral of a density over the box, with its standard error.

    Returns (volume * mean, volume * sample std / sqrt(m)); the draws are a
    pure function of the seed, so repeated calls are bit-identical.
    """
    if m < 1000:
        raise ValueError(f"need at least 1000 Monte Carlo samples, got {m}")
    volume = domain.volume
    if volume <= 0.0:
        raise DegenerateDomain("integration domain has zero volume")
    u = rng_from_seed(seed).random((int(m), domain.dim))
    pts = domain.lo + u * (domain.hi - domain.lo)
    vals = np.asarray(density(pts), dtype=np.float64)
    integral = volume * float(vals.mean())
    std_error = volume * float(vals.std(ddof=1)) / np.sqrt(m)
    return integral, std_error


@dataclass(frozen=True)
class FitConfig:
    """Everything a fit needs; JSON round-trips via to_dict/from_dict.

    mc_samples=None resolves to max(100 * 2^D, 10000) at fit time, and
    interpolation="auto" picks piecewise linear in 1-D, nearest-neighbor
    above.  The optimizer field matters only to `bandwidth.optimize` and the
    CLI; `fit_mcde` itself always runs the NLL grid loop.
    """

    kernel: str = "gaussian"
    b: float = 1.0
    variant: str = "f2"
    h_grid: GridSpec = field(default_factory=GridSpec)
    interpolation: str = "auto"
    mc_samples: int | None = None
    seed: int = 0
    optimizer: str = "nll"
    cv_folds: int = 5

    def resolve_mc_samples(self, d: int) -> int:
        if self.mc_samples is not None:
            return int(self.mc_samples)
        return max(100 * 2**d, MC_SAMPLES_MIN)

    def resolve_interpolation(self, d: int) -> str:
        if self.interpolation == "auto":
            return "piecewise_linear_1d" if d == 1 else "nearest_neighbor"
        return self.interpolation

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "b": self.b,
            "variant": self.variant,
            "h_grid": self.h_grid.to_dict(),
            "interpolation": self.interpolation,
            "mc_samples": self.mc_samples,
            "seed": self.seed,
            "optimizer": self.optimizer,
            "cv_folds": self.cv_folds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitConfig":
        cfg = cls(
            kernel=str(d.get("kernel", "gaussian")),
            b=float(d.get("b", 1.0)),
            variant=str(d.get("variant", "f2")),
            h_grid=GridSpec.from_dict(d.get("h_grid", {})),
            interpolation=str(d.get("interpolation", "auto")),
            mc_samples=None if d.get("mc_samples") is None else int(d["mc_samples"]),
            seed=int(d.get("seed", 0)),
            optimizer=str(d.get("optimizer", "nll")),
            cv_folds=int(d.get("cv_folds", 5)),
        )
        return cfg


@dataclass(eq=False)
class DensityModel:
    """A fitted density: pointwise values, extension, normalization and h*."""

    variant: str
    kernel: Kernel
    b: float
    h_star: float
    pointwise: PointwiseEstimate
    anchors: np.ndarray
    interpolant: Interpolant | None
    domain: DomainBox
    normalization_constant: float
    mc_integral: float
    mc_std_error: float
    mc_samples: int
    mc_seed: int
    loss_curve: LossCurve
    interpolation: str
    whitening: WhiteningTransform | None = None

    def unnormalized(self, points):
        """The extension q(x) before normalization (model space)."""
        if self.variant == "f2":
            return self.interpolant(points)
        return f1_evaluate(self.anchors, self.kernel, self.h_star, self.b, points)

    def density(self, points):
        """Normalized density C * q(x) in the model's (whitened) space."""
        q = self.unnormalized(points)
        return self.normalization_constant * q


def _grid_point(
    anchors: np.ndarray,
    dist: np.ndarray,
    kernel: Kernel,
    h: float,
    b: float,
    variant: str,
    method: str,
    domain: DomainBox,
    m: int,
    seed: int,
):
    d = anchors.shape[1]
    values, n_clamped = _pointwise_from_dist(dist, kernel, h, b, d)
    if not np.all(np.isfinite(values)):
        raise InvalidBandwidth(f"non-finite pointwise values at h={h:g}")
    if variant == "f2":
        q = build_interpolant(anchors, values, method)
    else:
        q = lambda pts: f1_evaluate(anchors, kernel, h, b, pts)  # noqa: E731
    integral, std_error = mc_normalize(q, domain, m, seed)
    if not (np.isfinite(integral) and integral > 0.0):
        raise ZeroDensityAtSamplePoint(
            f"Monte Carlo integral non-positive at h={h:g}; bandwidth too small"
        )
    constant = 1.0 / integral
    loss = loss_nll(constant * values, anchors)
    return {
        "values": values,
        "n_clamped": n_clamped,
        "interpolant": q if variant == "f2" else None,
        "integral": integral,
        "std_error": std_error,
        "constant": constant,
        "loss": loss,
    }


def fit_mcde(
    sample,
    config: FitConfig | None = None,
    *,
    threads: int = 1,
    whitening: WhiteningTransform | None = None,
) -> DensityModel:
    """Fit the density over a bandwidth grid and keep the NLL minimizer.

    Grid points are scored independently (and in parallel when threads > 1)
    with Monte Carlo seeds config.seed + grid index, so serial and parallel
    runs agree bit-exactly.  Failing grid points are skipped with a warning;
    AllGridPointsFailed is raised if none survive.
    """
    config = config or FitConfig()
    x = as_sample(sample)
    n, d = x.shape
    if n <= 2:
        raise EmptySample(f"fitting requires N > 2 points, got {n}")
    if not 0.0 <= config.b <= 1.0:
        raise InvalidBias(f"movement bias must be in [0, 1], got {config.b}")
    if config.variant not in ("f1", "f2"):
        raise ValueError(f"unknown variant {config.variant!r}; choose 'f1' or 'f2'")
    kernel = get_kernel(config.kernel)
    method = config.resolve_interpolation(d)
    if method not in _INTERP_METHODS:
        raise ValueError(f"unknown interpolation method {method!r}")
    if method == "piecewise_linear_1d" and d != 1:
        raise DimensionMismatch("piecewise linear interpolation requires D = 1")
    domain = DomainBox.from_points(x)
    if domain.volume <= 0.0:
        raise DegenerateDomain("sample bounding box has zero volume")
    grid = config.h_grid.resolve(n)
    m = config.resolve_mc_samples(d)
    dist = cdist(x, x)

    def evaluate(i: int):
        h = float(grid.values[i])
        try:
            return _grid_point(
                x, dist, kernel, h, config.b, config.variant, method, domain, m,
                config.seed + i,
            )
        except (InvalidBandwidth, ZeroDensityAtSamplePoint) as exc:
            warnings.warn(f"bandwidth grid point h={h:g} failed: {exc}", stacklevel=2)
            return f"{type(exc).__name__}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(evaluate, range(grid.values.size)))
    else:
        results = [evaluate(i) for i in range(grid.values.size)]

    losses = np.array(
        [r["loss"] if isinstance(r, dict) else np.nan for r in results], dtype=np.float64
    )
    reasons = [None if isinstance(r, dict) else r for r in results]
    failed = ~np.isfinite(losses)
    if np.all(failed):
        raise AllGridPointsFailed(
            "every bandwidth grid point failed: " + "; ".join(r for r in reasons if r)[:500]
        )
    idx = int(np.argmin(np.where(failed, np.inf, losses)))
    curve = LossCurve(
        h=grid.values,
        loss=np.where(failed, np.nan, losses),
        failed=failed,
        reasons=reasons,
        argmin_index=idx,
    )
    best = results[idx]
    h_star = float(grid.values[idx])
    pointwise = PointwiseEstimate(
        values=best["values"],
        h=h_star,
        b=float(config.b),
        kernel=kernel,
        d=d,
        n_clamped=best["n_clamped"],
    )
    return DensityModel(
        variant=config.variant,
        kernel=kernel,
        b=float(config.b),
        h_star=h_star,
        pointwise=pointwise,
        anchors=x,
        interpolant=best["interpolant"],
        domain=domain,
        normalization_constant=best["constant"],
        mc_integral=best["integral"],
        mc_std_error=best["std_error"],
        mc_samples=m,
        mc_seed=config.seed + idx,
        loss_curve=curve,
        interpolation=method,
        whitening=whitening,
    )


def normalization_constant_diagnostic(model: DensityModel) -> float:
    """The fitted C (reciprocal Monte Carlo integral); near 1 for healthy fits."""
    return float(model.normalization_constant)


def model_to_dict(model: DensityModel) -> dict:
    """Plain-data form of a fitted model, for JSON persistence."""
    out = {
        "variant": model.variant,
        "kernel": model.kernel.family,
        "b": model.b,
        "h_star": model.h_star,
        "normalization_constant": model.normalization_constant,
        "pointwise": [float(v) for v in model.pointwise.values],
        "n_clamped": model.pointwise.n_clamped,
        "anchors": [[float(v) for v in row] for row in model.anchors],
        "interpolation": model.interpolation,
        "domain": {
            "lo": [float(v) for v in model.domain.lo],
            "hi": [float(v) for v in model.domain.hi],
        },
        "mc_integral": model.mc_integral,
        "mc_std_error": model.mc_std_error,
        "mc_samples": model.mc_samples,
        "mc_seed": model.mc_seed,
        "loss_curve": model.loss_curve.to_dict(),
        "whitening": None,
    }
    if model.whitening is not None:
        out["whitening"] = {
            "mean": [float(v) for v in model.whitening.mean],
            "transform": [[float(v) for v in row] for row in model.whitening.transform],
            "inverse": [[float(v) for v in row] for row in model.whitening.inverse],
        }
    return out


def model_from_dict(data: dict) -> DensityModel:
    """Rebuild a fitted model from its persisted form."""
    anchors = np.asarray(data["anchors"], dtype=np.float64)
    values = np.asarray(data["pointwise"], dtype=np.float64)
    kernel = get_kernel(data["kernel"])
    domain = DomainBox(
        lo=np.asarray(data["domain"]["lo"], dtype=np.float64),
        hi=np.asarray(data["domain"]["hi"], dtype=np.float64),
    )
    method = data["interpolation"]
    interpolant = None
    if data["variant"] == "f2":
        interpolant = Interpolant(method, anchors, values, domain)
    whitening = None
    if data.get("whitening"):
        w = data["whitening"]
        whitening = WhiteningTransform(
            mean=np.asarray(w["mean"], dtype=np.float64),
            transform=np.asarray(w["transform"], dtype=np.float64),
            inverse=np.asarray(w["inverse"], dtype=np.float64),
        )
    curve_data = data.get("loss_curve") or {"h": [data["h_star"]], "loss": [0.0], "failed": [False], "argmin_index": 0}
    loss = np.array(
        [np.nan if v is None else float(v) for v in curve_data["loss"]], dtype=np.float64
    )
    curve = LossCurve(
        h=np.asarray(curve_data["h"], dtype=np.float64),
        loss=loss,
        failed=np.asarray(curve_data["failed"], dtype=bool),
        reasons=[None] * len(curve_data["h"]),
        argmin_index=int(curve_data["argmin_index"]),
    )
    pointwise = PointwiseEstimate(
        values=values,
        h=float(data["h_star"]),
        b=float(data["b"]),
        kernel=kernel,
        d=anchors.shape[1],
        n_clamped=int(data.get("n_clamped", 0)),
    )
    return DensityModel(
        variant=data["variant"],
        kernel=kernel,
        b=float(data["b"]),
        h_star=float(data["h_star"]),
        pointwise=pointwise,
        anchors=anchors,
        interpolant=interpolant,
        domain=domain,
        normalization_constant=float(data["normalization_constant"]),
        mc_integral=float(data.get("mc_integral", 0.0)),
        mc_std_error=float(data.get("mc_std_error", 0.0)),
        mc_samples=int(data.get("mc_samples", 0)),
        mc_seed=int(data.get("mc_seed", 0)),
        loss_curve=curve,
        interpolation=method,
        whitening=whitening,
    )
