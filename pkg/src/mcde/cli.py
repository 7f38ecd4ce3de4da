"""Command-line interface: fit, eval, score, bench-de, bench-outlier.

All outputs are JSON with sorted keys and floats printed to 17 significant
digits, so a command rerun with the same seed is byte-identical.  Exit codes:
0 success, 1 runtime/data error, 2 config/usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .bandwidth import GridSpec, optimize
from .bench import DEExperimentConfig, run_de_experiment, run_outlier_experiment
from .errors import DimensionMismatch, McdeError, ParseError
from .estimator import (
    FitConfig,
    fit_mcde,
    model_from_dict,
    model_to_dict,
)
from .outlier import detect
from .preprocess import reflect_boundary, transform_variable, whiten

__all__ = ["main", "load_csv", "format_json"]


class UsageError(Exception):
    """Configuration or usage problem; maps to exit code 2."""


# ---------------------------------------------------------------------------
# JSON output


def _format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def format_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"')
        out = out.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
        return f'"{out}"'
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [format_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(inner + it for it in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}"{key}": {format_json(obj[key], indent + 1)}'
            for key in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj, out_path: str | None):
    text = format_json(obj) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)


# ---------------------------------------------------------------------------
# Input files


def load_csv(path: str) -> np.ndarray:
    """Read a comma-separated numeric matrix (UTF-8, '.' decimals).

    A non-numeric first row is treated as a header and skipped.  Raises
    ParseError with 1-based line/column positions on malformed content.
    """
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    rows = []
    ncols = None
    start_line = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            if rows or lineno == len(lines):
                continue
            raise ParseError("blank line inside data", line=lineno)
        tokens = [tok.strip() for tok in line.split(",")]
        if ncols is None:
            try:
                rows.append([float(tok) for tok in tokens])
                ncols = len(tokens)
                start_line = lineno
                continue
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ParseError("non-numeric field", line=lineno) from None
        if len(tokens) != ncols:
            raise ParseError(
                f"expected {ncols} columns, found {len(tokens)}", line=lineno
            )
        try:
            rows.append([float(tok) for tok in tokens])
        except ValueError:
            bad = next(i for i, tok in enumerate(tokens, start=1) if not _is_float(tok))
            raise ParseError("non-numeric field", line=lineno, column=bad) from None
    if not rows:
        raise ParseError("no data rows", line=start_line or 1)
    return np.asarray(rows, dtype=np.float64)


def _is_float(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def load_labels(path: str, n: int) -> np.ndarray:
    """Read one 0/1 label per line, aligned with the sample rows."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = [ln.strip() for ln in handle.read().splitlines() if ln.strip()]
    labels = []
    for lineno, tok in enumerate(lines, start=1):
        if tok not in ("0", "1"):
            raise ParseError(f"label must be 0 or 1, got {tok!r}", line=lineno)
        labels.append(tok == "1")
    if len(labels) != n:
        raise DimensionMismatch(f"{len(labels)} labels for {n} sample rows")
    return np.asarray(labels, dtype=bool)


# ---------------------------------------------------------------------------
# Argument handling


def _add_fit_args(p: argparse.ArgumentParser):
    p.add_argument("--kernel", default="gaussian", help="kernel family name")
    p.add_argument("--b", type=float, default=1.0, help="movement bias in [0, 1]")
    p.add_argument("--variant", choices=("f1", "f2"), default="f2")
    p.add_argument(
        "--interpolation",
        choices=("auto", "piecewise_linear_1d", "nearest_neighbor"),
        default="auto",
    )
    p.add_argument("--grid-min", type=float, default=1.0)
    p.add_argument("--grid-max", type=float, default=100.0)
    p.add_argument("--grid-count", type=int, default=20)
    p.add_argument("--grid-linear", action="store_true", help="linear instead of log spacing")
    p.add_argument(
        "--no-grid-scaling",
        action="store_true",
        help="do not divide the grid bounds by sqrt(N)",
    )
    p.add_argument("--optimizer", choices=("nll", "loo", "kde-cv"), default="nll")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--mc-samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="defaults to $MCDE_SEED or 0")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--whiten", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--reflect", type=float, default=None, metavar="LOWER",
                   help="reflect a 1-D sample across this lower boundary")
    p.add_argument("--transform", choices=("log", "logit"), default=None)


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("MCDE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"MCDE_SEED must be an integer, got {env!r}") from None
    return 0


def _fit_config(args) -> FitConfig:
    return FitConfig(
        kernel=args.kernel,
        b=args.b,
        variant=args.variant,
        h_grid=GridSpec(
            min_raw=args.grid_min,
            max_raw=args.grid_max,
            count=args.grid_count,
            log=not args.grid_linear,
            n_scaling=not args.no_grid_scaling,
        ),
        interpolation=args.interpolation,
        mc_samples=args.mc_samples,
        seed=_resolve_seed(args.seed),
        optimizer=args.optimizer.replace("-", "_"),
        cv_folds=args.folds,
    )


def _require_file(path: str):
    if not os.path.isfile(path):
        raise UsageError(f"input file not found: {path}")


def _preprocess(points: np.ndarray, args) -> tuple[np.ndarray, object]:
    if args.transform is not None:
        points = transform_variable(points, args.transform)
    if args.reflect is not None:
        points = reflect_boundary(points, args.reflect)
    transform = None
    if args.whiten:
        points, transform = whiten(points)
    return points, transform


# ---------------------------------------------------------------------------
# Commands


def _cmd_fit(args) -> int:
    _require_file(args.input)
    points = load_csv(args.input)
    config = _fit_config(args)
    points, transform = _preprocess(points, args)
    if config.optimizer != "nll":
        h_star, _ = optimize(points, config)
        config = FitConfig(
            kernel=config.kernel,
            b=config.b,
            variant=config.variant,
            h_grid=GridSpec(min_raw=h_star, max_raw=h_star, count=1, n_scaling=False),
            interpolation=config.interpolation,
            mc_samples=config.mc_samples,
            seed=config.seed,
            optimizer=config.optimizer,
            cv_folds=config.cv_folds,
        )
    model = fit_mcde(points, config, threads=args.threads, whitening=transform)
    _emit(model_to_dict(model), args.out)
    return 0


def _cmd_eval(args) -> int:
    _require_file(args.model)
    _require_file(args.input)
    import json

    with open(args.model, "r", encoding="utf-8") as handle:
        model = model_from_dict(json.load(handle))
    points = load_csv(args.input)
    if model.whitening is not None:
        working = model.whitening.apply(points)
        jacobian = abs(model.whitening.jacobian_det)
    else:
        working = points
        jacobian = 1.0
    q = model.unnormalized(working)
    density = model.normalization_constant * q * jacobian
    _emit({"density": list(density), "q": list(q)}, args.out)
    return 0


def _cmd_score(args) -> int:
    _require_file(args.input)
    points = load_csv(args.input)
    labels = None
    if args.labels is not None:
        _require_file(args.labels)
        labels = load_labels(args.labels, points.shape[0])
    config = _fit_config(args)
    if args.transform is not None:
        points = transform_variable(points, args.transform)
    if args.reflect is not None:
        points = reflect_boundary(points, args.reflect)
    report = detect(
        points, args.k, config, labels=labels, whiten=args.whiten, threads=args.threads
    )
    payload = {"k": report.k, "scores": list(report.scores)}
    if report.auc is not None:
        payload["auc"] = report.auc
    _emit(payload, args.out)
    return 0


def _load_json_config(path: str) -> dict:
    import json

    _require_file(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON config {path}: {exc}") from None


def _cmd_bench_de(args) -> int:
    raw = _load_json_config(args.config)
    try:
        config = DEExperimentConfig.from_dict(raw)
    except (KeyError, TypeError, ValueError, McdeError) as exc:
        raise UsageError(f"bad experiment config: {exc}") from None
    report = run_de_experiment(config, threads=args.threads)
    _emit(report.to_dict(), args.out)
    if args.csv is not None:
        with open(args.csv, "w", encoding="utf-8") as handle:
            handle.write("d,n,realization,emse_mcde,emse_kde\n")
            for d, n, i, em, ek in report.per_realization_rows():
                handle.write(f"{d},{n},{i},{_format_float(em)},{_format_float(ek)}\n")
    return 0


def _cmd_bench_outlier(args) -> int:
    raw = _load_json_config(args.config)
    try:
        report = run_outlier_experiment(
            datasets=raw["datasets"],
            dims=[int(v) for v in raw["dims"]],
            k_values=[int(v) for v in raw["k_values"]],
            r=int(raw.get("r", 8)),
            seed=int(raw.get("seed", 0)),
            fit=FitConfig.from_dict(raw.get("fit", {})),
            whiten=bool(raw.get("whiten", True)),
            threads=args.threads,
        )
    except KeyError as exc:
        raise UsageError(f"bench-outlier config missing key: {exc}") from None
    _emit(report, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcde",
        description="Chain-based nonparametric density estimation, outlier scoring and benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a density model to a CSV sample")
    p_fit.add_argument("--input", required=True)
    p_fit.add_argument("--out", default=None)
    _add_fit_args(p_fit)
    p_fit.set_defaults(func=_cmd_fit)

    p_eval = sub.add_parser("eval", help="evaluate a fitted model at query points")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--input", required=True)
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(func=_cmd_eval)

    p_score = sub.add_parser("score", help="anomaly-score a CSV sample")
    p_score.add_argument("--input", required=True)
    p_score.add_argument("--k", type=int, required=True)
    p_score.add_argument("--labels", default=None)
    p_score.add_argument("--out", default=None)
    _add_fit_args(p_score)
    p_score.set_defaults(func=_cmd_score)

    p_de = sub.add_parser("bench-de", help="run the estimation-error experiment")
    p_de.add_argument("--config", required=True)
    p_de.add_argument("--out", default=None)
    p_de.add_argument("--csv", default=None, help="per-realization EMSE dump")
    p_de.add_argument("--threads", type=int, default=1)
    p_de.set_defaults(func=_cmd_bench_de)

    p_out = sub.add_parser("bench-outlier", help="run the AUC-vs-k experiment")
    p_out.add_argument("--config", required=True)
    p_out.add_argument("--out", default=None)
    p_out.add_argument("--threads", type=int, default=1)
    p_out.set_defaults(func=_cmd_bench_outlier)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except McdeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
