import math

import numpy as np
import pytest

from mcde.bandwidth import (
    BandwidthGrid,
    GridSpec,
    kde_kfold_cv,
    loss_kde_nll,
    loss_loo,
    loss_nll,
    optimize,
)
from mcde.errors import (
    InvalidBandwidth,
    TooFewPoints,
    ZeroDensityAtSamplePoint,
)
from mcde.estimator import FitConfig, fit_mcde
from mcde.kernels import get_kernel
from mcde.synthdata import parse_spec, sample_product

GAUSS = get_kernel("gaussian")


def test_default_grid_spans_scaled_interval():
    grid = GridSpec().resolve(400)
    assert grid.values.size == 20
    assert grid.values[0] == pytest.approx(1.0 / 20.0)
    assert grid.values[-1] == pytest.approx(100.0 / 20.0)
    ratios = grid.values[1:] / grid.values[:-1]
    assert np.allclose(ratios, ratios[0])  # log spacing
    assert np.all(np.diff(grid.values) > 0)


def test_grid_options():
    lin = GridSpec(min_raw=1.0, max_raw=3.0, count=5, log=False, n_scaling=False).resolve(999)
    assert np.allclose(lin.values, [1.0, 1.5, 2.0, 2.5, 3.0])
    single = GridSpec(min_raw=2.0, max_raw=2.0, count=1, n_scaling=False).resolve(10)
    assert single.values.tolist() == [2.0]
    with pytest.raises(InvalidBandwidth):
        GridSpec(min_raw=-1.0).resolve(10)
    with pytest.raises(ValueError):
        BandwidthGrid(np.array([1.0, 1.0]))


def test_loss_nll_examples(rng):
    x = rng.uniform(size=20)
    assert loss_nll(lambda p: np.ones(p.shape[0]), x) == 0.0
    # doubling the density (domain halved, sample still inside) lowers the
    # loss by N log 2
    base = loss_nll(lambda p: np.full(p.shape[0], 1.0), x)
    doubled = loss_nll(lambda p: np.full(p.shape[0], 2.0), x)
    assert base - doubled == pytest.approx(20.0 * math.log(2.0), abs=1e-12)
    with pytest.raises(ZeroDensityAtSamplePoint):
        loss_nll(np.zeros(20), x)


def loo_curve(points, grid):
    """Losses over a grid, +inf where the loss is undefined (tiny h)."""
    losses = np.full(grid.size, np.inf)
    for i, h in enumerate(grid):
        try:
            losses[i] = loss_loo(points, GAUSS, h)
        except ZeroDensityAtSamplePoint:
            pass
    return losses


def test_loss_loo_two_point_minimizer():
    d = 1.0
    grid = np.geomspace(0.05, 10.0, 200)
    h_star = grid[int(np.argmin(loo_curve([0.0, d], grid)))]
    step = grid[1] / grid[0]
    assert d / step <= h_star <= d * step


def test_loss_loo_translation_invariance(rng):
    x = rng.normal(size=30)
    a = loss_loo(x, GAUSS, 0.5)
    b = loss_loo(x + 123.456, GAUSS, 0.5)
    assert a == pytest.approx(b, rel=1e-12)


def test_loss_loo_subtraction_equals_explicit(rng):
    from scipy.spatial.distance import cdist

    for _ in range(5):
        x = rng.normal(size=(40, 2))
        h = float(rng.uniform(0.3, 2.0))
        u = cdist(x, x) / h
        k = np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
        np.fill_diagonal(k, 0.0)
        explicit = -np.log(k.sum(axis=1) / (40 * h**2)).sum()
        assert loss_loo(x, GAUSS, h) == pytest.approx(explicit, abs=1e-10)


def test_loss_loo_is_true_loo_likelihood_up_to_constant(rng):
    # The exact leave-one-out likelihood uses 1/(N-1); the subtraction form
    # differs from it by the h-independent constant N log(N / (N-1)).
    from scipy.spatial.distance import cdist

    x = rng.normal(size=(25, 1))
    n = 25
    expected_const = n * math.log(n / (n - 1.0))
    diffs = []
    for h in (0.3, 0.7, 1.5):
        u = cdist(x, x) / h
        k = np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
        np.fill_diagonal(k, 0.0)
        true_loo = -np.log(k.sum(axis=1) / ((n - 1) * h)).sum()
        diffs.append(loss_loo(x, GAUSS, h) - true_loo)
    assert np.allclose(diffs, expected_const, atol=1e-10)


def test_loss_loo_raises_for_isolated_point():
    with pytest.raises(ZeroDensityAtSamplePoint):
        loss_loo([0.0, 0.1, 50.0], get_kernel("uniform"), 0.5)


def test_plain_kde_nll_pathology(rng):
    # The self-scored KDE likelihood keeps improving as h -> 0.
    x = rng.normal(size=120)
    assert loss_kde_nll(x, GAUSS, 1e-6) < loss_kde_nll(x, GAUSS, 1e-3)
    assert loss_kde_nll(x, GAUSS, 1e-3) < loss_kde_nll(x, GAUSS, 0.05)


def test_kfold_cv_basics(rng):
    x = rng.normal(size=200)
    grid = BandwidthGrid(np.array([0.4]))
    assert kde_kfold_cv(x, GAUSS, grid, folds=5, seed=1) == 0.4
    full = GridSpec().resolve(200)
    a = kde_kfold_cv(x, GAUSS, full, folds=5, seed=7)
    assert a == kde_kfold_cv(x, GAUSS, full, folds=5, seed=7)
    with pytest.raises(TooFewPoints):
        kde_kfold_cv([0.0, 1.0, 2.0], GAUSS, full, folds=5, seed=0)


def test_kfold_cv_near_silverman():
    x = sample_product(parse_spec("normal:0,1"), 1000, 1, seed=77)
    h = kde_kfold_cv(x, GAUSS, GridSpec().resolve(1000), folds=5, seed=3)
    silverman = 1.06 * 1000 ** (-0.2)
    assert silverman / 2.0 < h < silverman * 2.0


def test_optimize_dispatch_loo():
    d = 2.0
    x = [0.0, d]
    cfg = FitConfig(
        optimizer="loo",
        h_grid=GridSpec(min_raw=0.1, max_raw=20.0, count=60, n_scaling=False),
    )
    h_star, curve = optimize(x, cfg)
    grid = cfg.h_grid.resolve(2).values
    assert h_star == grid[int(np.argmin(np.abs(grid - d)))]
    assert curve.argmin_index == int(np.argmin(np.abs(grid - d)))


def test_optimize_excludes_failed_points():
    import warnings

    x = np.concatenate([np.linspace(0.0, 1.0, 30), [50.0]])
    cfg = FitConfig(
        kernel="uniform",
        optimizer="loo",
        h_grid=GridSpec(min_raw=0.5, max_raw=200.0, count=8, n_scaling=False),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        h_star, curve = optimize(x, cfg)
    assert curve.failed.any()
    assert not curve.failed[curve.argmin_index]
    assert h_star == curve.h_star


def test_optimize_unknown_method():
    with pytest.raises(ValueError):
        optimize([0.0, 1.0, 2.0], FitConfig(optimizer="grid"))


def test_nll_and_loo_agree_within_factor_two():
    x = sample_product(parse_spec("normal:0,1"), 2000, 1, seed=13)
    h_nll, _ = optimize(x, FitConfig(optimizer="nll", seed=13))
    h_loo, _ = optimize(x, FitConfig(optimizer="loo"))
    ratio = h_nll / h_loo
    assert 0.5 < ratio < 2.0


def test_nll_curve_unimodal_on_gaussian_data():
    # Over the default grid the fitted-loss curve should have a single descent
    # then ascent; allow one rogue seed out of eight.
    violations = 0
    for seed in range(8):
        x = sample_product(parse_spec("normal:0,1"), 500, 1, seed=500 + seed)
        model = fit_mcde(x, FitConfig(seed=seed))
        loss = model.loss_curve.loss
        finite = loss[np.isfinite(loss)]
        signs = np.sign(np.diff(finite))
        changes = int(np.count_nonzero(np.diff(signs[signs != 0]) != 0))
        if changes > 1:
            violations += 1
    assert violations <= 1
