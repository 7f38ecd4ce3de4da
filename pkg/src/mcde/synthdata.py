"""Seeded generators and exact densities for the benchmark distributions.

One-dimensional families are sampled by inverting their CDF on uniforms from
a counter-based (Philox) stream, so a (seed, draw index) pair always maps to
the same variate.  Multivariate samples take every coordinate i.i.d. from the
same 1-D law, making the joint density the product of the marginals.

Conventions: normal(mu, sigma2) is parameterized by variance; exp(rate) has
density rate * exp(-rate x); gamma(shape) has scale 1; loglaplace(loc, scale)
is exp(Y) with Y ~ Laplace(loc, scale); mixtures weight their components
equally unless explicit weights are given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._util import derive_seed, rng_from_seed
from .errors import InvalidParams

__all__ = [
    "DistributionSpec",
    "LabeledSample",
    "parse_spec",
    "sample_product",
    "pdf_eval",
    "cdf_eval",
    "sample_mixture",
]

_SCALAR_FAMILIES = ("normal", "chisq", "exp", "gamma", "loglaplace")


@dataclass(frozen=True)
class DistributionSpec:
    """A 1-D distribution family (products over dimensions are implicit)."""

    family: str
    params: tuple = ()
    components: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        f, p = self.family, self.params
        if f == "normal":
            if len(p) != 2 or p[1] <= 0:
                raise InvalidParams("normal requires (mu, sigma2) with sigma2 > 0")
        elif f == "chisq":
            if len(p) != 1 or p[0] <= 0:
                raise InvalidParams("chisq requires df > 0")
        elif f == "exp":
            if len(p) != 1 or p[0] <= 0:
                raise InvalidParams("exp requires rate > 0")
        elif f == "gamma":
            if len(p) != 1 or p[0] <= 0:
                raise InvalidParams("gamma requires shape > 0")
        elif f == "loglaplace":
            if len(p) != 2 or p[1] <= 0:
                raise InvalidParams("loglaplace requires (loc, scale) with scale > 0")
        elif f == "mixture":
            if not self.components:
                raise InvalidParams("mixture requires at least one component")
            if any(c.family == "mixture" for c in self.components):
                raise InvalidParams("nested mixtures are not supported")
            w = self.weights or tuple(1.0 / len(self.components) for _ in self.components)
            if len(w) != len(self.components) or any(x <= 0 for x in w):
                raise InvalidParams("mixture weights must be positive, one per component")
            if abs(sum(w) - 1.0) > 1e-12:
                raise InvalidParams("mixture weights must sum to 1")
            object.__setattr__(self, "weights", tuple(float(x) for x in w))
        else:
            raise InvalidParams(f"unknown distribution family {f!r}")
        object.__setattr__(self, "params", tuple(float(x) for x in p))

    def as_string(self) -> str:
        if self.family == "mixture":
            return "mix:" + "+".join(c.as_string() for c in self.components)
        return self.family + ":" + ",".join(f"{x:g}" for x in self.params)


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """Sampled points with outlier labels (True marks an outlier)."""

    points: np.ndarray
    labels: np.ndarray
    n_in: int
    n_out: int
    seed: int


def parse_spec(text: str) -> DistributionSpec:
    """Parse spec strings like "normal:4,0.5", "chisq:5" or "mix:normal:0,2+normal:8,3"."""
    text = text.strip()
    if text.startswith("mix:"):
        parts = text[4:].split("+")
        return DistributionSpec(
            family="mixture", components=tuple(parse_spec(p) for p in parts)
        )
    family, _, rest = text.partition(":")
    family = family.strip().lower()
    if family not in _SCALAR_FAMILIES:
        raise InvalidParams(f"unknown distribution family {family!r} in {text!r}")
    try:
        params = tuple(float(tok) for tok in rest.split(",")) if rest else ()
    except ValueError as exc:
        raise InvalidParams(f"bad parameters in {text!r}: {exc}") from None
    return DistributionSpec(family=family, params=params)


def _ppf(spec: DistributionSpec, u: np.ndarray) -> np.ndarray:
    f, p = spec.family, spec.params
    if f == "normal":
        return p[0] + math.sqrt(p[1]) * stats.norm.ppf(u)
    if f == "chisq":
        return stats.chi2.ppf(u, p[0])
    if f == "exp":
        return -np.log1p(-u) / p[0]
    if f == "gamma":
        return stats.gamma.ppf(u, p[0])
    if f == "loglaplace":
        loc, scale = p
        y = np.where(
            u < 0.5,
            loc + scale * np.log(2.0 * u),
            loc - scale * np.log(2.0 * (1.0 - u)),
        )
        return np.exp(y)
    raise InvalidParams(f"no inverse CDF for family {f!r}")


def _pdf1(spec: DistributionSpec, x: np.ndarray) -> np.ndarray:
    f, p = spec.family, spec.params
    if f == "normal":
        return stats.norm.pdf(x, loc=p[0], scale=math.sqrt(p[1]))
    if f == "chisq":
        return stats.chi2.pdf(x, p[0])
    if f == "exp":
        return stats.expon.pdf(x, scale=1.0 / p[0])
    if f == "gamma":
        return stats.gamma.pdf(x, p[0])
    if f == "loglaplace":
        loc, scale = p
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = stats.laplace.pdf(np.log(x[pos]), loc=loc, scale=scale) / x[pos]
        return out
    # mixture
    total = np.zeros_like(x)
    for w, comp in zip(spec.weights, spec.components):
        total += w * _pdf1(comp, x)
    return total


def _cdf1(spec: DistributionSpec, x: np.ndarray) -> np.ndarray:
    f, p = spec.family, spec.params
    if f == "normal":
        return stats.norm.cdf(x, loc=p[0], scale=math.sqrt(p[1]))
    if f == "chisq":
        return stats.chi2.cdf(x, p[0])
    if f == "exp":
        return stats.expon.cdf(x, scale=1.0 / p[0])
    if f == "gamma":
        return stats.gamma.cdf(x, p[0])
    if f == "loglaplace":
        loc, scale = p
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = stats.laplace.cdf(np.log(x[pos]), loc=loc, scale=scale)
        return out
    total = np.zeros_like(x)
    for w, comp in zip(spec.weights, spec.components):
        total += w * _cdf1(comp, x)
    return total


def sample_product(spec: DistributionSpec, n: int, d: int, seed: int) -> np.ndarray:
    """Draw an (n, d) sample with i.i.d. coordinates from the 1-D spec."""
    if n < 1 or d < 1:
        raise InvalidParams(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    rng = rng_from_seed(seed)
    tiny = np.finfo(np.float64).tiny
    top = 1.0 - np.finfo(np.float64).epsneg
    if spec.family == "mixture":
        u = np.clip(rng.random((n, d, 2)), tiny, top)
        edges = np.cumsum(spec.weights)
        which = np.searchsorted(edges, u[..., 0], side="right")
        out = np.empty((n, d))
        for ci, comp in enumerate(spec.components):
            mask = which == ci
            if np.any(mask):
                out[mask] = _ppf(comp, u[..., 1][mask])
        return out
    u = np.clip(rng.random((n, d)), tiny, top)
    return _ppf(spec, u)


def pdf_eval(spec: DistributionSpec, x):
    """Exact product density.

    A scalar or a length-D vector is a single point (returns a float); an
    (M, D) array returns M values.  Zero outside the support.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        return float(_pdf1(spec, arr.reshape(1))[0])
    if arr.ndim == 1:
        return float(np.prod(_pdf1(spec, arr)))
    if arr.ndim != 2:
        raise ValueError("points must be scalar, 1-D, or (M, D)")
    return np.prod(_pdf1(spec, arr), axis=1)


def cdf_eval(spec: DistributionSpec, x):
    """Exact 1-D CDF (used e.g. for goodness-of-fit checks)."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = _cdf1(spec, arr)
    return float(out[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else out


def sample_mixture(
    fin: DistributionSpec,
    fout: DistributionSpec,
    n_in: int,
    n_out: int,
    d: int,
    seed: int,
) -> LabeledSample:
    """Draw exactly n_in inliers and n_out outliers, shuffled, with labels."""
    if n_in < 1 or n_out < 1:
        raise InvalidParams("need n_in >= 1 and n_out >= 1")
    inliers = sample_product(fin, n_in, d, derive_seed(seed, 0))
    outliers = sample_product(fout, n_out, d, derive_seed(seed, 1))
    points = np.vstack([inliers, outliers])
    labels = np.zeros(n_in + n_out, dtype=bool)
    labels[n_in:] = True
    perm = rng_from_seed(derive_seed(seed, 2)).permutation(n_in + n_out)
    return LabeledSample(
        points=points[perm], labels=labels[perm], n_in=n_in, n_out=n_out, seed=int(seed)
    )
