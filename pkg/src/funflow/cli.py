"""Command-line front end.

Single results are printed as one JSON line on stdout; tables are CSV with
the fully resolved configuration echoed as ``#`` header comments (and under
the ``config`` key of JSON lines). When ``--out`` names a directory, report
commands also render a PNG figure next to each CSV. Errors are written to
stderr as ``error[<code>]: message``; exit status is 0 only when the
requested computation completed (2 for configuration/usage problems, 1 for
runtime failures).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import figures
from .bandwidth import CVGrid, cv_select
from .config import merge_config, parse_config_file
from .curves import Dataset, load_dataset, save_dataset, simulate_regression_sample
from .errors import ConfigError, FunflowError
from .estimator import (
    BandwidthPlan,
    asymptotic_constants,
    get_kernel,
    init_state,
    load_state,
    prediction_result,
    save_state,
    update_state,
)
from .experiments import (
    Cell,
    EstimatorSettings,
    ExperimentConfig,
    coverage_study,
    mspe_study,
    rate_check,
    timing_benchmark,
)
from .seminorms import SemiNormSpec, fit_seminorm


def parse_seminorm(text: str) -> SemiNormSpec:
    """Parse ``kind`` or ``kind:count``, e.g. ``pca:3``."""
    kind, _, count = text.partition(":")
    try:
        return SemiNormSpec(kind.strip(), int(count) if count else None)
    except ValueError:
        raise ConfigError(f"bad seminorm count in {text!r}") from None


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _resolve(args: argparse.Namespace, allowed: dict, defaults: dict) -> dict:
    file_values = parse_config_file(args.config) if getattr(args, "config", None) else {}
    cli_values = {
        key: getattr(args, key) for key in allowed if hasattr(args, key)
    }
    resolved = merge_config(file_values, allowed, cli_values)
    for key, value in defaults.items():
        resolved.setdefault(key, value)
    return resolved


def _require(resolved: dict, *keys: str) -> None:
    for key in keys:
        if resolved.get(key) is None:
            raise ConfigError(f"missing required option --{key.replace('_', '-')}")


def _echo_config(resolved: dict) -> dict:
    return {k: v for k, v in sorted(resolved.items()) if v is not None}


def _print_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload) + "\n")


def _load_single_curve(path: str):
    data = load_dataset(path)
    if len(data) != 1:
        raise ConfigError(f"{path} must contain exactly one curve row, has {len(data)}")
    return data.curves[0]


# ---------------------------------------------------------------------------
# Subcommand handlers


def cmd_simulate(args) -> int:
    allowed = {"n": int, "p": int, "noise": float, "seed": int, "out": str}
    cfg = _resolve(args, allowed, {"n": 100, "p": 100, "noise": 0.1, "seed": 0, "out": "."})
    if cfg["noise"] < 0:
        raise ConfigError(f"noise must be >= 0, got {cfg['noise']}")
    if cfg["n"] < 1 or cfg["p"] < 2:
        raise ConfigError("need n >= 1 and p >= 2")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    data = simulate_regression_sample(cfg["n"], cfg["p"], cfg["noise"], cfg["seed"])
    save_dataset(data, out / "curves.csv", out / "responses.csv")
    _print_json(
        {
            "written": [str(out / "curves.csv"), str(out / "responses.csv")],
            "config": _echo_config(cfg),
        }
    )
    return 0


_ESTIMATOR_KEYS = {
    "l": float,
    "kernel": str,
    "seminorm": str,
    "C": float,
    "nu": float,
    "cv": bool,
}
_ESTIMATOR_DEFAULTS = {"l": 0.0, "kernel": "quadratic", "seminorm": "pca", "cv": False}


def _build_state(cfg: dict, data: Dataset, query):
    spec = parse_seminorm(cfg["seminorm"])
    kernel = get_kernel(cfg["kernel"])
    seminorm = fit_seminorm(spec, data)
    if cfg["cv"]:
        if cfg.get("C") is not None or cfg.get("nu") is not None:
            raise ConfigError("give either --cv or explicit --C/--nu, not both")
        report = cv_select(data, CVGrid(), cfg["l"], kernel, spec, seminorm)
        c_val, nu_val = report.selected
    else:
        c_val = cfg.get("C") if cfg.get("C") is not None else 1.0
        nu_val = cfg.get("nu") if cfg.get("nu") is not None else 0.1
    plan = BandwidthPlan.frozen(c_val, nu_val)
    state = init_state(query, data, cfg["l"], kernel, plan, seminorm)
    return state, (c_val, nu_val)


def cmd_fit_predict(args) -> int:
    allowed = {
        "curves": str,
        "responses": str,
        "query": str,
        "alpha": float,
        "snapshot": str,
        **_ESTIMATOR_KEYS,
    }
    cfg = _resolve(args, allowed, dict(_ESTIMATOR_DEFAULTS))
    _require(cfg, "curves", "responses", "query")
    data = load_dataset(cfg["curves"], cfg["responses"])
    query = _load_single_curve(cfg["query"])
    state, (c_val, nu_val) = _build_state(cfg, data, query)
    result = prediction_result(state, cfg.get("alpha"))
    if cfg.get("snapshot"):
        save_state(state, cfg["snapshot"])
    payload = result.to_json_dict()
    payload["config"] = _echo_config({**cfg, "C": c_val, "nu": nu_val})
    if result.diagnostics.get("sigma2") == 0.0 and cfg.get("alpha") is not None:
        payload["note"] = "zero variance estimate; interval degenerates to a point"
    _print_json(payload)
    return 0


def cmd_update(args) -> int:
    allowed = {"snapshot": str, "curves": str, "responses": str, "out": str}
    cfg = _resolve(args, allowed, {})
    _require(cfg, "snapshot", "curves", "responses")
    state = load_state(cfg["snapshot"])
    new_data = load_dataset(cfg["curves"], cfg["responses"])
    if len(new_data) != 1:
        raise ConfigError(
            f"update expects exactly one new observation row, got {len(new_data)}"
        )
    update_state(state, new_data.curves[0], float(new_data.responses[0]))
    result = prediction_result(state)
    target = cfg.get("out") or cfg["snapshot"]
    save_state(state, target)
    payload = result.to_json_dict()
    payload["snapshot"] = str(target)
    payload["config"] = _echo_config(cfg)
    _print_json(payload)
    return 0


def cmd_cv(args) -> int:
    allowed = {
        "curves": str,
        "responses": str,
        "l": float,
        "kernel": str,
        "seminorm": str,
        "c_grid": str,
        "nu_grid": str,
        "out": str,
    }
    cfg = _resolve(
        args, allowed, {"l": 0.0, "kernel": "quadratic", "seminorm": "pca"}
    )
    _require(cfg, "curves", "responses")
    data = load_dataset(cfg["curves"], cfg["responses"])
    grid = CVGrid(
        _parse_float_list(cfg["c_grid"]) if cfg.get("c_grid") else CVGrid().C_values,
        _parse_float_list(cfg["nu_grid"]) if cfg.get("nu_grid") else CVGrid().nu_values,
    )
    report = cv_select(
        data, grid, cfg["l"], get_kernel(cfg["kernel"]), parse_seminorm(cfg["seminorm"])
    )
    echo = _echo_config(cfg)
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        report.to_csv(out / "cv_report.csv", tuple(f"{k}={v}" for k, v in echo.items()))
        figures.render_cv(report, out / "cv_report.png")
    else:
        report.to_csv(sys.stdout, tuple(f"{k}={v}" for k, v in echo.items()))
    _print_json(
        {
            "selected_C": report.selected[0],
            "selected_nu": report.selected[1],
            "score": report.selected_entry.score,
            "config": echo,
        }
    )
    return 0


def cmd_constants(args) -> int:
    allowed = {"kernel": str, "kappa": float, "delta": float, "l": float, "out": str}
    cfg = _resolve(args, allowed, {"kernel": "quadratic", "l": 0.0})
    _require(cfg, "kappa")
    consts = asymptotic_constants(get_kernel(cfg["kernel"]), cfg["kappa"])
    rows = [("M0", consts.m0), ("M1", consts.m1), ("M2", consts.m2)]
    if cfg.get("delta") is not None:
        delta, l_val = cfg["delta"], cfg["l"]
        rows.append(("beta_1", consts.beta(1.0, delta)))
        rows.append(("beta_1_minus_l", consts.beta(1.0 - l_val, delta)))
        rows.append(("beta_1_minus_2l", consts.beta(1.0 - 2.0 * l_val, delta)))
        rows.append(("alpha_l", consts.alpha_weight(l_val, delta)))
    echo = _echo_config(cfg)
    lines = [f"# {k}={v}" for k, v in echo.items()]
    lines.append("name,value")
    lines.extend(f"{name},{value:.17g}" for name, value in rows)
    text = "\n".join(lines) + "\n"
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "constants.csv").write_text(text)
    sys.stdout.write(text)
    return 0


_DESIGN_KEYS = {
    "n": int,
    "p": int,
    "noise": float,
    "reps": int,
    "seed": int,
    "design": str,
    "jobs": int,
    **_ESTIMATOR_KEYS,
}
_DESIGN_DEFAULTS = {
    "n": 100,
    "p": 100,
    "noise": 0.1,
    "reps": 500,
    "seed": 0,
    "design": "brownian",
    "jobs": 1,
    **_ESTIMATOR_DEFAULTS,
}


def _experiment_config(cfg: dict) -> ExperimentConfig:
    spec = parse_seminorm(cfg["seminorm"])
    settings = EstimatorSettings(
        l=cfg["l"],
        kernel=cfg["kernel"],
        seminorm=spec.kind,
        seminorm_count=spec.count,
        C=cfg.get("C") if cfg.get("C") is not None else 1.0,
        nu=cfg.get("nu") if cfg.get("nu") is not None else 0.1,
        use_cv=cfg["cv"],
    )
    return ExperimentConfig(
        n=cfg["n"],
        p=cfg["p"],
        noise_sd=cfg["noise"],
        replications=cfg["reps"],
        seed=cfg["seed"],
        design=cfg["design"],
        settings=settings,
        n_jobs=cfg["jobs"],
    )


def _write_report(report, out_dir: Optional[str], stem: str, renderer) -> None:
    if out_dir is None:
        report.to_csv(sys.stdout)
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.to_csv(out / f"{stem}_summary.csv")
    report.records_to_csv(out / f"{stem}_records.csv")
    report.series_to_csv(out / f"{stem}_series.csv")
    renderer(report, out / f"{stem}.png")


def cmd_experiment(args) -> int:
    allowed = {
        "study": str,
        "alpha": float,
        "n_list": str,
        "l_list": str,
        "seminorm_list": str,
        "out": str,
        **_DESIGN_KEYS,
    }
    cfg = _resolve(args, allowed, dict(_DESIGN_DEFAULTS))
    _require(cfg, "study")
    study = cfg["study"]
    exp_cfg = _experiment_config(cfg)
    if study == "mspe":
        chosen = [
            key
            for key in ("n_list", "l_list", "seminorm_list")
            if cfg.get(key) is not None
        ]
        if len(chosen) > 1:
            raise ConfigError("give at most one of --n-list/--l-list/--seminorm-list")
        if not chosen:
            cells = [Cell("base")]
        elif chosen[0] == "n_list":
            cells = [Cell(f"n={n}", n=n) for n in _parse_int_list(cfg["n_list"])]
        elif chosen[0] == "l_list":
            cells = [Cell(f"l={v:g}", l=v) for v in _parse_float_list(cfg["l_list"])]
        else:
            cells = []
            for text in cfg["seminorm_list"].split(","):
                spec = parse_seminorm(text.strip())
                cells.append(
                    Cell(text.strip(), seminorm=spec.kind, seminorm_count=spec.count)
                )
        report = mspe_study(exp_cfg, cells)
        _write_report(report, cfg.get("out"), "mspe", figures.render_mspe)
        _print_json(
            {
                "cells": {c.name: {"mean": c.mean, "sd": c.sd} for c in report.cells},
                "config": _echo_config(cfg),
            }
        )
    elif study == "coverage":
        alpha = cfg.get("alpha") if cfg.get("alpha") is not None else 0.05
        report = coverage_study(exp_cfg, alpha)
        _write_report(report, cfg.get("out"), "coverage", figures.render_coverage)
        _print_json(
            {
                "coverage": report.coverage,
                "excluded": report.excluded,
                "pivot_skewness": report.pivot_skewness,
                "pivot_excess_kurtosis": report.pivot_excess_kurtosis,
                "config": _echo_config(cfg),
            }
        )
    elif study == "rate":
        if not cfg.get("n_list"):
            raise ConfigError("--study rate requires --n-list with >= 3 sizes")
        report = rate_check(_parse_int_list(cfg["n_list"]), exp_cfg)
        _write_report(report, cfg.get("out"), "rate", figures.render_rate)
        _print_json(
            {
                "mse": {str(n): float(m) for n, m in zip(report.ns, report.mse)},
                "slope": report.slope,
                "kappa_hat": report.kappa_hat,
                "target_slope": report.target_slope,
                "config": _echo_config(cfg),
            }
        )
    else:
        raise ConfigError(f"unknown study {study!r}; expected mspe, coverage, or rate")
    return 0


def cmd_bench(args) -> int:
    allowed = {"n0": int, "N": str, "out": str, **_DESIGN_KEYS}
    defaults = dict(_DESIGN_DEFAULTS)
    defaults["n0"] = 100
    cfg = _resolve(args, allowed, defaults)
    _require(cfg, "N")
    checkpoints = _parse_int_list(cfg["N"])
    report = timing_benchmark(cfg["n0"], checkpoints, _experiment_config(cfg))
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        report.to_csv(out / "bench_times.csv")
        report.series_to_csv(out / "bench_series.csv")
        figures.render_timing(report, out / "bench.png")
    else:
        report.to_csv(sys.stdout)
    slopes = report.growth_exponents()
    _print_json(
        {
            "checkpoints": [
                {"N": n, "recursive": r, "batch": b}
                for n, r, b in report.checkpoint_times()
            ],
            "ratio": report.ratio(),
            "recursive_growth_exponent": slopes[0],
            "batch_growth_exponent": slopes[1],
            "config": _echo_config(cfg),
        }
    )
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="funflow",
        description="Recursive kernel regression with curve-valued covariates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value config file; flags override it")

    p = sub.add_parser("simulate", help="write a simulated curves/responses pair")
    add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_simulate)

    def add_estimator_flags(p):
        p.add_argument("--l", type=float)
        p.add_argument("--kernel", choices=["quadratic", "uniform"])
        p.add_argument("--seminorm", help="kind or kind:count, e.g. pca:3")
        p.add_argument("--C", type=float)
        p.add_argument("--nu", type=float)
        p.add_argument("--cv", action="store_const", const=True, default=None,
                       help="select (C, nu) by leave-one-out cross-validation")

    p = sub.add_parser("fit-predict", help="fit on a training set and predict a query")
    add_common(p)
    p.add_argument("--curves")
    p.add_argument("--responses")
    p.add_argument("--query")
    p.add_argument("--alpha", type=float, help="confidence band level alpha")
    p.add_argument("--snapshot", help="write a resumable state snapshot here")
    add_estimator_flags(p)
    p.set_defaults(handler=cmd_fit_predict)

    p = sub.add_parser("update", help="advance a snapshot by one observation")
    add_common(p)
    p.add_argument("--snapshot")
    p.add_argument("--curves", help="CSV with exactly one new curve row")
    p.add_argument("--responses", help="CSV with exactly one new response")
    p.add_argument("--out", help="write the advanced snapshot here (default: in place)")
    p.set_defaults(handler=cmd_update)

    p = sub.add_parser("cv", help="cross-validated bandwidth selection report")
    add_common(p)
    p.add_argument("--curves")
    p.add_argument("--responses")
    p.add_argument("--l", type=float)
    p.add_argument("--kernel", choices=["quadratic", "uniform"])
    p.add_argument("--seminorm")
    p.add_argument("--c-grid", dest="c_grid", help="comma-separated C values")
    p.add_argument("--nu-grid", dest="nu_grid", help="comma-separated nu values")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_cv)

    p = sub.add_parser("constants", help="kernel/small-ball asymptotic constants")
    add_common(p)
    p.add_argument("--kernel", choices=["quadratic", "uniform"])
    p.add_argument("--kappa", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_constants)

    def add_design_flags(p):
        p.add_argument("--n", type=int)
        p.add_argument("--p", type=int)
        p.add_argument("--noise", type=float)
        p.add_argument("--reps", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--design", choices=["brownian", "onedim"])
        p.add_argument("--jobs", type=int, help="parallel workers (capped by FUNFLOW_THREADS)")
        add_estimator_flags(p)

    p = sub.add_parser("experiment", help="Monte Carlo studies (mspe, coverage, rate)")
    add_common(p)
    p.add_argument("--study", choices=["mspe", "coverage", "rate"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--n-list", dest="n_list", help="comma-separated sample sizes")
    p.add_argument("--l-list", dest="l_list", help="comma-separated l values")
    p.add_argument("--seminorm-list", dest="seminorm_list",
                   help="comma-separated seminorm specs")
    p.add_argument("--out")
    add_design_flags(p)
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("bench", help="streaming-vs-refit timing benchmark")
    add_common(p)
    p.add_argument("--n0", type=int)
    p.add_argument("--N", help="comma-separated checkpoint counts of new observations")
    p.add_argument("--out")
    add_design_flags(p)
    p.set_defaults(handler=cmd_bench)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        sys.stderr.write(f"error[{exc.code}]: {exc.message}\n")
        return 2
    except FunflowError as exc:
        sys.stderr.write(f"error[{exc.code}]: {exc.message}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
