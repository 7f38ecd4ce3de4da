"""Kernel families and their analytic constants.

Every family integrates to 1, is symmetric and non-increasing in |u|, and is
evaluated as K(u) with u = d / h.  Compact families have support |u| <= 1 and
vanish outside it.  The gamma constant is |K''(0)| / K(0); for the kinked
families (exponential, triangular) the one-sided second derivative is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kernel",
    "KernelConstants",
    "KERNEL_FAMILIES",
    "get_kernel",
    "kernel_eval",
    "kernel_constants",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Kernel:
    """A kernel family; support_radius is 1 for compact families, inf otherwise."""

    family: str
    support_radius: float


@dataclass(frozen=True)
class KernelConstants:
    """Analytic constants of a kernel family.

    k0 is K(0), sigma2_k the second moment of K, r_k its squared L2 norm and
    gamma = |K''(0)| / K(0).  The boundary-contribution exponents alpha and
    beta are defined for compact families only.
    """

    k0: float
    sigma2_k: float
    r_k: float
    gamma: float
    alpha: float | None = None
    beta: float | None = None


def _gaussian(u):
    return np.exp(-0.5 * u * u) / _SQRT_2PI


def _exponential(u):
    return 0.5 * np.exp(-u)


def _uniform(u):
    return np.full_like(u, 0.5)


def _triangular(u):
    return 1.0 - u


def _epanechnikov(u):
    return 0.75 * (1.0 - u * u)


def _cosine(u):
    return (math.pi / 4.0) * np.cos(math.pi * u / 2.0)


# family -> (evaluator on |u|, support radius, constants)
_FAMILIES = {
    "gaussian": (
        _gaussian,
        math.inf,
        KernelConstants(
            k0=1.0 / _SQRT_2PI,
            sigma2_k=1.0,
            r_k=1.0 / (2.0 * math.sqrt(math.pi)),
            gamma=1.0,
        ),
    ),
    "exponential": (
        _exponential,
        math.inf,
        KernelConstants(k0=0.5, sigma2_k=2.0, r_k=0.25, gamma=1.0),
    ),
    "uniform": (
        _uniform,
        1.0,
        KernelConstants(k0=0.5, sigma2_k=1.0 / 3.0, r_k=0.5, gamma=0.0, alpha=1.0, beta=0.0),
    ),
    "triangular": (
        _triangular,
        1.0,
        KernelConstants(k0=1.0, sigma2_k=1.0 / 6.0, r_k=2.0 / 3.0, gamma=0.0, alpha=2.0, beta=1.0),
    ),
    "epanechnikov": (
        _epanechnikov,
        1.0,
        KernelConstants(k0=0.75, sigma2_k=0.2, r_k=0.6, gamma=2.0, alpha=2.0, beta=1.0),
    ),
    "cosine": (
        _cosine,
        1.0,
        KernelConstants(
            k0=math.pi / 4.0,
            sigma2_k=1.0 - 8.0 / math.pi**2,
            r_k=math.pi**2 / 16.0,
            gamma=math.pi**2 / 4.0,
            alpha=2.0,
            beta=1.0,
        ),
    ),
}

KERNEL_FAMILIES = tuple(_FAMILIES)


def get_kernel(family: str) -> Kernel:
    """Look up a kernel family by its lowercase name."""
    name = str(family).lower()
    if name not in _FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}; choose from {KERNEL_FAMILIES}")
    return Kernel(family=name, support_radius=_FAMILIES[name][1])


def kernel_eval(kernel: Kernel, u):
    """Evaluate K(u); zero outside the support for compact families."""
    func, radius, _ = _FAMILIES[kernel.family]
    arr = np.abs(np.asarray(u, dtype=np.float64))
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)
    inside = arr <= radius
    if np.any(inside):
        out[inside] = func(arr[inside])
    return float(out[0]) if scalar else out


def kernel_constants(kernel: Kernel) -> KernelConstants:
    """Analytic constants of the family (exact closed forms)."""
    return _FAMILIES[kernel.family][2]
