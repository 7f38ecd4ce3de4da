"""Benchmark harness: estimation-error and outlier-detection experiments.

The density-estimation experiment fixes a 1-D law (taken as a product over
dimensions), selects bandwidths on fresh training samples (twice, averaged),
then scores R independently drawn test samples with both this package's
estimator and its own KDE baseline at those fixed bandwidths.  Errors are
mean squared deviations from the true density, computed in whitened
coordinates (the true density is divided by the constant whitening Jacobian
so both sides live in the same space).  Reported are the averaged errors with
2-sigma half-widths, their ratio, and the errors scaled by the smallest-N
entry.

Everything is a pure function of the base seed: realization i of a cell uses
seed cell_seed + i, with disjoint offset bands for training draws and Monte
Carlo streams, so serial and parallel runs emit identical reports.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import preprocess
from .bandwidth import GridSpec, kde_kfold_cv, optimize
from .errors import InvalidParams
from .estimator import FitConfig, fit_mcde, kde_evaluate
from .kernels import get_kernel
from .outlier import _scores_by_k, auc
from .synthdata import DistributionSpec, parse_spec, pdf_eval, sample_mixture, sample_product

__all__ = [
    "DEExperimentConfig",
    "DEReport",
    "OUTLIER_DATASETS",
    "emse",
    "performance_ratio",
    "run_de_experiment",
    "run_outlier_experiment",
]

# Disjoint seed bands within one experiment cell.
_CELL_STRIDE = 1_000_003
_TRAIN_BAND = 10_000
_FIT_BAND = 20_000
_CV_BAND = 30_000
_TEST_FIT_BAND = 40_000

# name -> (inlier spec, outlier spec, n_in, n_out)
OUTLIER_DATASETS = {
    "dataset1": ("normal:4,0.5", "loglaplace:2,1", 450, 50),
    "dataset2": ("exp:1", "normal:5,1", 180, 20),
    "dataset3": ("gamma:2", "gamma:12", 950, 50),
}


def emse(true_pdf, estimate, sample) -> float:
    """Mean squared error (1/N) sum_j (f(x_j) - fhat(x_j))^2 over the sample.

    Both arguments may be callables on (N, D) points or precomputed arrays.
    """
    x = np.asarray(sample, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    f = np.asarray(true_pdf(x) if callable(true_pdf) else true_pdf, dtype=np.float64)
    fhat = np.asarray(estimate(x) if callable(estimate) else estimate, dtype=np.float64)
    if f.shape != (x.shape[0],) or fhat.shape != (x.shape[0],):
        raise ValueError("need one density value per sample point")
    diff = f - fhat
    return float(np.mean(diff * diff))


def performance_ratio(emse_kde: float, emse_mcde: float) -> float:
    """Relative performance <EMSE>_KDE / <EMSE>_MCDE; > 1 means the chain wins."""
    return emse_kde / emse_mcde


@dataclass(frozen=True)
class DEExperimentConfig:
    """Density-estimation experiment settings.

    mcde_optimizer is one of "nll", "loo", "kde_cv" or "kde" (reuse the
    KDE-selected bandwidth); kde_optimizer accepts "kde_cv" or "loo".
    """

    spec: DistributionSpec
    dims: tuple
    sizes: tuple
    realizations: int = 8
    mcde_optimizer: str = "nll"
    kde_optimizer: str = "kde_cv"
    seed: int = 0
    fit: FitConfig = field(default_factory=FitConfig)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.as_string(),
            "dims": list(self.dims),
            "sizes": list(self.sizes),
            "r": self.realizations,
            "mcde_optimizer": self.mcde_optimizer,
            "kde_optimizer": self.kde_optimizer,
            "seed": self.seed,
            "fit": self.fit.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DEExperimentConfig":
        sizes = tuple(int(v) for v in d["sizes"])
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise InvalidParams("sizes must be strictly ascending")
        r = int(d.get("r", d.get("realizations", 8)))
        if r < 1:
            raise InvalidParams("need at least one realization")
        return cls(
            spec=parse_spec(d["spec"]),
            dims=tuple(int(v) for v in d["dims"]),
            sizes=sizes,
            realizations=r,
            mcde_optimizer=str(d.get("mcde_optimizer", "nll")),
            kde_optimizer=str(d.get("kde_optimizer", "kde_cv")),
            seed=int(d.get("seed", 0)),
            fit=FitConfig.from_dict(d.get("fit", {})),
        )


@dataclass(eq=False)
class DECell:
    """Results for one (dimension, sample size) cell."""

    d: int
    n: int
    h_mcde: float
    h_kde: float
    avg_emse_mcde: float
    avg_emse_kde: float
    performance_ratio: float
    halfwidth_mcde: float | None
    halfwidth_kde: float | None
    scaled_emse_mcde: float
    scaled_emse_kde: float
    scaled_halfwidth_mcde: float | None
    scaled_halfwidth_kde: float | None
    emse_mcde: np.ndarray
    emse_kde: np.ndarray

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "h_mcde": self.h_mcde,
            "h_kde": self.h_kde,
            "avg_emse_mcde": self.avg_emse_mcde,
            "avg_emse_kde": self.avg_emse_kde,
            "performance_ratio": self.performance_ratio,
            "halfwidth_mcde": self.halfwidth_mcde,
            "halfwidth_kde": self.halfwidth_kde,
            "scaled_emse_mcde": self.scaled_emse_mcde,
            "scaled_emse_kde": self.scaled_emse_kde,
            "scaled_halfwidth_mcde": self.scaled_halfwidth_mcde,
            "scaled_halfwidth_kde": self.scaled_halfwidth_kde,
        }


@dataclass(eq=False)
class DEReport:
    """All cells of a density-estimation experiment plus the config echo."""

    config: DEExperimentConfig
    cells: list

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
        }

    def per_realization_rows(self) -> list:
        rows = []
        for cell in self.cells:
            for i, (em, ek) in enumerate(zip(cell.emse_mcde, cell.emse_kde)):
                rows.append((cell.d, cell.n, i, float(em), float(ek)))
        return rows


def _select_bandwidth(method: str, sample_white, config: FitConfig, cv_seed: int) -> float:
    if method == "nll":
        return fit_mcde(sample_white, config).h_star
    if method == "loo":
        h, _ = optimize(sample_white, replace(config, optimizer="loo"))
        return h
    if method == "kde_cv":
        grid = config.h_grid.resolve(sample_white.shape[0])
        return kde_kfold_cv(
            sample_white, get_kernel(config.kernel), grid, folds=config.cv_folds, seed=cv_seed
        )
    raise InvalidParams(f"unknown bandwidth selector {method!r}")


def _run_cell(config: DEExperimentConfig, d: int, n: int, cell_seed: int, threads: int) -> DECell:
    spec = config.spec
    kernel = get_kernel(config.fit.kernel)
    r = config.realizations

    # Bandwidth selection on fresh training samples, twice, averaged.
    h_mcde_vals, h_kde_vals = [], []
    for t in (0, 1):
        train = sample_product(spec, n, d, cell_seed + _TRAIN_BAND + t)
        train_white, _ = preprocess.whiten(train)
        fit_cfg = replace(config.fit, seed=cell_seed + _FIT_BAND + 300 * t)
        h_kde_vals.append(
            _select_bandwidth(config.kde_optimizer, train_white, fit_cfg, cell_seed + _CV_BAND + t)
        )
        if config.mcde_optimizer == "kde":
            h_mcde_vals.append(h_kde_vals[-1])
        else:
            h_mcde_vals.append(
                _select_bandwidth(
                    config.mcde_optimizer, train_white, fit_cfg, cell_seed + _CV_BAND + 100 + t
                )
            )
    h_mcde = float(np.mean(h_mcde_vals))
    h_kde = float(np.mean(h_kde_vals))

    fixed_grid = replace(
        config.fit,
        h_grid=GridSpec(min_raw=h_mcde, max_raw=h_mcde, count=1, n_scaling=False),
    )

    def realize(i: int) -> tuple[float, float]:
        test = sample_product(spec, n, d, cell_seed + i)
        test_white, wt = preprocess.whiten(test)
        truth = pdf_eval(spec, test) / abs(wt.jacobian_det)
        model = fit_mcde(
            test_white, replace(fixed_grid, seed=cell_seed + _TEST_FIT_BAND + 300 * i)
        )
        mcde_vals = model.normalization_constant * model.pointwise.values
        kde_vals = kde_evaluate(test_white, kernel, h_kde, test_white)
        return emse(truth, mcde_vals, test_white), emse(truth, kde_vals, test_white)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(realize, range(r)))
    else:
        pairs = [realize(i) for i in range(r)]
    em = np.array([p[0] for p in pairs])
    ek = np.array([p[1] for p in pairs])

    def halfwidth(values: np.ndarray) -> float | None:
        if r < 2:
            return None
        return float(2.0 * values.std(ddof=1) / np.sqrt(r))

    avg_m, avg_k = float(em.mean()), float(ek.mean())
    return DECell(
        d=d,
        n=n,
        h_mcde=h_mcde,
        h_kde=h_kde,
        avg_emse_mcde=avg_m,
        avg_emse_kde=avg_k,
        performance_ratio=performance_ratio(avg_k, avg_m),
        halfwidth_mcde=halfwidth(em),
        halfwidth_kde=halfwidth(ek),
        scaled_emse_mcde=np.nan,
        scaled_emse_kde=np.nan,
        scaled_halfwidth_mcde=None,
        scaled_halfwidth_kde=None,
        emse_mcde=em,
        emse_kde=ek,
    )


def run_de_experiment(config: DEExperimentConfig, threads: int = 1) -> DEReport:
    """Run the full (dims x sizes) grid of the estimation-error experiment."""
    cells = []
    for di, d in enumerate(config.dims):
        per_dim = []
        for ni, n in enumerate(config.sizes):
            cell_index = di * len(config.sizes) + ni
            cell_seed = config.seed + _CELL_STRIDE * (cell_index + 1)
            per_dim.append(_run_cell(config, int(d), int(n), cell_seed, threads))
        # Scale by the smallest-N entry of the same dimension.
        ref_m = per_dim[0].avg_emse_mcde
        ref_k = per_dim[0].avg_emse_kde
        for cell in per_dim:
            cell.scaled_emse_mcde = cell.avg_emse_mcde / ref_m
            cell.scaled_emse_kde = cell.avg_emse_kde / ref_k
            if cell.halfwidth_mcde is not None:
                cell.scaled_halfwidth_mcde = cell.halfwidth_mcde / ref_m
                cell.scaled_halfwidth_kde = cell.halfwidth_kde / ref_k
        cells.extend(per_dim)
    return DEReport(config=config, cells=cells)


def _resolve_dataset(entry) -> tuple[str, DistributionSpec, DistributionSpec, int, int]:
    if isinstance(entry, str):
        if entry not in OUTLIER_DATASETS:
            raise InvalidParams(
                f"unknown dataset {entry!r}; choose from {sorted(OUTLIER_DATASETS)}"
            )
        fin, fout, n_in, n_out = OUTLIER_DATASETS[entry]
        return entry, parse_spec(fin), parse_spec(fout), n_in, n_out
    name = str(entry.get("name", "custom"))
    return (
        name,
        parse_spec(entry["fin"]),
        parse_spec(entry["fout"]),
        int(entry["n_in"]),
        int(entry["n_out"]),
    )


def run_outlier_experiment(
    datasets,
    dims,
    k_values,
    r: int = 8,
    seed: int = 0,
    fit: FitConfig | None = None,
    whiten: bool = True,
    threads: int = 1,
) -> dict:
    """AUC per (dataset, dimension, k), averaged over r seeded repetitions.

    Rows carry a flag marking k below the locality threshold (1 - c) N, i.e.
    k < n_out, where reliable scoring of localized outliers is not expected.
    """
    fit = fit or FitConfig()
    if r < 1:
        raise InvalidParams("need at least one repetition")
    rows = []
    resolved = [_resolve_dataset(entry) for entry in datasets]
    for cell_index, ((name, fin, fout, n_in, n_out), d) in enumerate(
        (ds, dd) for ds in resolved for dd in dims
    ):
        cell_seed = seed + _CELL_STRIDE * (cell_index + 1)
        ks = sorted(int(k) for k in k_values)

        def repeat(rep: int) -> dict[int, float]:
            labeled = sample_mixture(fin, fout, n_in, n_out, int(d), cell_seed + rep)
            points = labeled.points
            transform = None
            if whiten:
                points, transform = preprocess.whiten(points)
            model = fit_mcde(
                points,
                replace(fit, seed=cell_seed + _TEST_FIT_BAND + 300 * rep),
                whitening=transform,
            )
            by_k = _scores_by_k(points, model.pointwise.values, ks)
            return {k: auc(by_k[k], labeled.labels) for k in ks}

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                reps = list(pool.map(repeat, range(r)))
        else:
            reps = [repeat(rep) for rep in range(r)]
        for k in ks:
            values = np.array([rp[k] for rp in reps])
            rows.append(
                {
                    "dataset": name,
                    "d": int(d),
                    "k": int(k),
                    "auc_mean": float(values.mean()),
                    "auc_halfwidth": (
                        float(2.0 * values.std(ddof=1) / np.sqrt(r)) if r > 1 else None
                    ),
                    "auc_per_seed": [float(v) for v in values],
                    "below_locality_threshold": bool(k < n_out),
                }
            )
    return {
        "rows": rows,
        "r": int(r),
        "seed": int(seed),
        "whiten": bool(whiten),
        "fit": fit.to_dict(),
    }
