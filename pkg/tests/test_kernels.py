import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from mcde.kernels import KERNEL_FAMILIES, get_kernel, kernel_constants, kernel_eval

SQRT_2PI = math.sqrt(2.0 * math.pi)

# gamma = |K''(0)| / K(0); one-sided derivative for the kinked families.
GAMMA_TABLE = {
    "gaussian": 1.0,
    "exponential": 1.0,
    "uniform": 0.0,
    "triangular": 0.0,
    "epanechnikov": 2.0,
    "cosine": math.pi**2 / 4.0,
}

ALPHA_BETA_TABLE = {
    "uniform": (1.0, 0.0),
    "triangular": (2.0, 1.0),
    "epanechnikov": (2.0, 1.0),
    "cosine": (2.0, 1.0),
}


def quad_over_support(kernel, func):
    lim = 40.0 if math.isinf(kernel.support_radius) else kernel.support_radius
    value, _ = integrate.quad(func, -lim, lim, limit=200)
    return value


def test_eval_examples():
    assert kernel_eval(get_kernel("gaussian"), 0.0) == pytest.approx(1.0 / SQRT_2PI, abs=1e-15)
    assert kernel_eval(get_kernel("uniform"), 2.0) == 0.0
    assert kernel_eval(get_kernel("epanechnikov"), 0.5) == pytest.approx(0.5625, abs=1e-15)
    assert kernel_eval(get_kernel("exponential"), 1.0) == pytest.approx(0.5 * math.exp(-1), abs=1e-15)


def test_eval_is_vectorized_and_symmetric():
    k = get_kernel("triangular")
    u = np.array([-0.5, 0.0, 0.5, 2.0])
    vals = kernel_eval(k, u)
    assert vals.shape == (4,)
    assert vals[0] == vals[2]
    assert vals[3] == 0.0


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_integrates_to_one(family):
    k = get_kernel(family)
    assert quad_over_support(k, lambda u: kernel_eval(k, u)) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_constants_match_quadrature(family):
    k = get_kernel(family)
    c = kernel_constants(k)
    assert c.k0 == pytest.approx(kernel_eval(k, 0.0), abs=1e-15)
    assert c.sigma2_k == pytest.approx(
        quad_over_support(k, lambda u: u * u * kernel_eval(k, u)), abs=1e-8
    )
    assert c.r_k == pytest.approx(
        quad_over_support(k, lambda u: kernel_eval(k, u) ** 2), abs=1e-8
    )
    assert c.k0 > 0 and c.sigma2_k > 0 and c.r_k > 0


def test_triangular_closed_forms():
    c = kernel_constants(get_kernel("triangular"))
    assert c.sigma2_k == pytest.approx(1.0 / 6.0, abs=1e-15)
    assert c.r_k == pytest.approx(2.0 / 3.0, abs=1e-15)


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_gamma_matches_table(family):
    c = kernel_constants(get_kernel(family))
    assert abs(c.gamma - GAMMA_TABLE[family]) < 1e-10


@pytest.mark.parametrize("family", ["gaussian", "epanechnikov", "cosine", "uniform"])
def test_gamma_finite_difference_cross_check(family):
    # Central second difference, step 1e-4, for the families smooth at 0;
    # roundoff limits this check to ~1e-6.
    k = get_kernel(family)
    eps = 1e-4
    kpp = (kernel_eval(k, eps) - 2.0 * kernel_eval(k, 0.0) + kernel_eval(k, -eps)) / eps**2
    c = kernel_constants(k)
    assert abs(kpp) / c.k0 == pytest.approx(c.gamma, abs=5e-6)


def test_alpha_beta_defined_only_for_compact_families():
    for family in KERNEL_FAMILIES:
        c = kernel_constants(get_kernel(family))
        if math.isinf(get_kernel(family).support_radius):
            assert c.alpha is None and c.beta is None
        else:
            assert (c.alpha, c.beta) == ALPHA_BETA_TABLE[family]


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
@given(
    u=st.floats(min_value=0.0, max_value=5.0),
    step=st.floats(min_value=0.0, max_value=5.0),
)
def test_monotone_non_increasing(family, u, step):
    k = get_kernel(family)
    assert kernel_eval(k, u) >= kernel_eval(k, u + step) - 1e-15


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_zero_outside_support(family):
    k = get_kernel(family)
    if math.isinf(k.support_radius):
        assert kernel_eval(k, 50.0) >= 0.0
    else:
        assert kernel_eval(k, k.support_radius + 1e-12) == 0.0


def test_unknown_family_rejected():
    with pytest.raises(ValueError, match="unknown kernel"):
        get_kernel("biweight")
