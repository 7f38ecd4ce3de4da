import math

import numpy as np
import pytest
from scipy import integrate, stats

from mcde.errors import InvalidParams
from mcde.synthdata import (
    DistributionSpec,
    cdf_eval,
    parse_spec,
    pdf_eval,
    sample_mixture,
    sample_product,
)

ALL_SPECS = [
    "normal:4,0.5",
    "chisq:5",
    "exp:1",
    "gamma:2",
    "gamma:12",
    "loglaplace:2,1",
    "mix:normal:0,2+normal:8,3",
]


def test_parse_round_trip():
    for text in ALL_SPECS:
        spec = parse_spec(text)
        assert parse_spec(spec.as_string()) == spec
    mix = parse_spec("mix:normal:0,2+normal:8,3")
    assert mix.family == "mixture"
    assert mix.weights == (0.5, 0.5)


def test_parse_validation():
    for bad in ("normal:0,-1", "chisq:0", "exp:-2", "weird:1", "gamma:", "normal:a,b"):
        with pytest.raises(InvalidParams):
            parse_spec(bad)
    with pytest.raises(InvalidParams):
        DistributionSpec(family="mixture", components=())


def test_chisq_mean():
    x = sample_product(parse_spec("chisq:5"), 100_000, 1, seed=11)
    se = math.sqrt(10.0 / 100_000)  # var of chisq(5) is 10
    assert abs(x.mean() - 5.0) < 3.0 * se


def test_mixture_mean():
    x = sample_product(parse_spec("mix:normal:0,2+normal:8,3"), 100_000, 1, seed=12)
    # equal-weight mixture: mean 4, variance 0.5*(2+0) + 0.5*(3+16) - 16 = 18.5
    se = math.sqrt(18.5 / 100_000)
    assert abs(x.mean() - 4.0) < 3.0 * se


def test_determinism():
    spec = parse_spec("gamma:2")
    a = sample_product(spec, 500, 3, seed=99)
    b = sample_product(spec, 500, 3, seed=99)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_product(spec, 500, 3, seed=100))


def test_pdf_examples():
    assert pdf_eval(parse_spec("normal:0,1"), 0.0) == pytest.approx(
        1.0 / math.sqrt(2 * math.pi), abs=1e-12
    )
    assert pdf_eval(parse_spec("exp:1"), -1.0) == 0.0
    expected = 3.0**1.5 * math.exp(-1.5) / (2.0**2.5 * math.gamma(2.5))
    assert pdf_eval(parse_spec("chisq:5"), 3.0) == pytest.approx(expected, rel=1e-12)


# Integration segments covering each family's support (split at kinks/tails so
# adaptive quadrature cannot miss the mass).
SEGMENTS = {
    "normal:4,0.5": [(-6.0, 14.0)],
    "chisq:5": [(0.0, 120.0)],
    "exp:1": [(0.0, 60.0)],
    "gamma:2": [(0.0, 120.0)],
    "gamma:12": [(0.0, 200.0)],
    "loglaplace:2,1": [(0.0, math.exp(2.0)), (math.exp(2.0), math.inf)],
    "mix:normal:0,2+normal:8,3": [(-20.0, 30.0)],
}


@pytest.mark.parametrize("text", ALL_SPECS)
def test_pdf_integrates_to_one(text):
    spec = parse_spec(text)
    total = 0.0
    for lo, hi in SEGMENTS[text]:
        part, _ = integrate.quad(lambda v: pdf_eval(spec, float(v)), lo, hi, limit=500)
        total += part
    assert total == pytest.approx(1.0, abs=1e-6)


def test_product_property(rng):
    spec = parse_spec("mix:normal:0,2+normal:8,3")
    pts = rng.normal(4.0, 3.0, size=(20, 4))
    joint = pdf_eval(spec, pts)
    manual = np.ones(20)
    for j in range(4):
        manual *= np.array([pdf_eval(spec, np.array([v])) for v in pts[:, j]])
    assert np.array_equal(joint, manual)


@pytest.mark.parametrize("text", ALL_SPECS)
def test_kolmogorov_smirnov_self_test(text):
    spec = parse_spec(text)
    x = sample_product(spec, 10_000, 1, seed=7)[:, 0]
    result = stats.kstest(x, lambda v: cdf_eval(spec, v))
    assert result.pvalue > 0.001


def test_loglaplace_convention():
    # exp(Y) with Y ~ Laplace(2, 1): median exp(2), flat density below it.
    spec = parse_spec("loglaplace:2,1")
    assert cdf_eval(spec, math.exp(2.0)) == pytest.approx(0.5, abs=1e-12)
    assert pdf_eval(spec, 1.0) == pytest.approx(pdf_eval(spec, 5.0), rel=1e-12)
    assert pdf_eval(spec, -1.0) == 0.0


def test_sample_mixture_labels():
    lab = sample_mixture(
        parse_spec("normal:4,0.5"), parse_spec("loglaplace:2,1"), 450, 50, 2, seed=5
    )
    assert lab.points.shape == (500, 2)
    assert int(lab.labels.sum()) == 50
    assert lab.n_in == 450 and lab.n_out == 50
    again = sample_mixture(
        parse_spec("normal:4,0.5"), parse_spec("loglaplace:2,1"), 450, 50, 2, seed=5
    )
    assert np.array_equal(lab.points, again.points)
    assert np.array_equal(lab.labels, again.labels)
    # labels stay aligned with their generating population after the shuffle:
    # inliers are tightly clustered around (4, 4)
    inliers = lab.points[~lab.labels]
    assert np.all(np.abs(inliers - 4.0) < 4.0)


def test_dataset_sizes_match_protocol():
    lab3 = sample_mixture(parse_spec("gamma:2"), parse_spec("gamma:12"), 950, 50, 1, seed=1)
    assert lab3.points.shape == (1000, 1)
    assert int(lab3.labels.sum()) == 50


def test_sample_mixture_validation():
    with pytest.raises(InvalidParams):
        sample_mixture(parse_spec("exp:1"), parse_spec("normal:5,1"), 0, 10, 1, seed=0)
