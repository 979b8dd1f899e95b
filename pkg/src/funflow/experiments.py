"""Monte Carlo studies and the incremental-vs-batch timing benchmark.

Replication r of a study draws its data from an independent PRNG stream
keyed by (seed, r), so results are bit-reproducible for a given config and
independent of execution order, including under process parallelism. Cells
of one study share each replication's data (smaller-n cells see a prefix of
the largest sample), which makes across-cell comparisons low-noise.

Wall-clock benchmarks are the only non-deterministic output and always run
single-threaded in a pinned order.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.stats import kurtosis as _kurtosis
from scipy.stats import skew as _skew

from .bandwidth import CVGrid, cv_select
from .curves import Curve, Dataset, Grid, _brownian_values
from .errors import DegenerateCdfError, EmptyNeighborhoodError
from .estimator import (
    BandwidthPlan,
    get_kernel,
    init_state,
    predict,
    prediction_result,
    update_state,
)
from .seminorms import SemiNormSpec, distances_to, fit_seminorm

DESIGNS = ("brownian", "onedim")


@dataclass(frozen=True)
class EstimatorSettings:
    """How the estimator is configured inside a study."""

    l: float = 0.0
    kernel: str = "quadratic"
    seminorm: str = "pca"
    seminorm_count: Optional[int] = None
    C: float = 1.0
    nu: float = 0.1
    use_cv: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    """Design of a Monte Carlo study.

    ``design`` is ``brownian`` (Brownian paths, response = integral of the
    squared curve plus noise) or ``onedim`` (curves proportional to the
    constant function, giving a known small-ball exponent of 1 for rate
    checks).
    """

    n: int = 100
    p: int = 100
    noise_sd: float = 0.1
    replications: int = 500
    seed: int = 0
    design: str = "brownian"
    settings: EstimatorSettings = field(default_factory=EstimatorSettings)
    n_jobs: int = 1

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ValueError(f"unknown design {self.design!r}")
        if self.replications < 1:
            raise ValueError("need at least one replication")

    def as_dict(self) -> dict:
        d = {
            "n": self.n,
            "p": self.p,
            "noise_sd": self.noise_sd,
            "replications": self.replications,
            "seed": self.seed,
            "design": self.design,
            "n_jobs": self.n_jobs,
        }
        d.update(
            {
                "l": self.settings.l,
                "kernel": self.settings.kernel,
                "seminorm": self.settings.seminorm,
                "seminorm_count": self.settings.seminorm_count,
                "C": self.settings.C,
                "nu": self.settings.nu,
                "use_cv": self.settings.use_cv,
            }
        )
        return d


@dataclass(frozen=True)
class Cell:
    """One study cell: overrides applied on top of the config's settings."""

    name: str
    n: Optional[int] = None
    l: Optional[float] = None
    kernel: Optional[str] = None
    seminorm: Optional[str] = None
    seminorm_count: Optional[int] = None
    C: Optional[float] = None
    nu: Optional[float] = None


@dataclass(frozen=True)
class _ResolvedCell:
    name: str
    n: int
    settings: EstimatorSettings


def _resolve_cells(cfg: ExperimentConfig, cells: Sequence[Cell]) -> tuple:
    resolved = []
    for cell in cells:
        overrides = {
            key: value
            for key, value in (
                ("l", cell.l),
                ("kernel", cell.kernel),
                ("seminorm", cell.seminorm),
                ("seminorm_count", cell.seminorm_count),
                ("C", cell.C),
                ("nu", cell.nu),
            )
            if value is not None
        }
        resolved.append(
            _ResolvedCell(
                cell.name,
                cell.n if cell.n is not None else cfg.n,
                replace(cfg.settings, **overrides),
            )
        )
    return tuple(resolved)


def resolve_jobs(requested: Optional[int]) -> int:
    """Requested worker count, capped by the FUNFLOW_THREADS env var."""
    jobs = requested if requested and requested > 0 else 1
    cap = os.environ.get("FUNFLOW_THREADS")
    if cap:
        jobs = min(jobs, max(1, int(cap)))
    return max(1, jobs)


# ---------------------------------------------------------------------------
# Per-replication simulation


def _simulate_rep(cfg: ExperimentConfig, n_max: int, rep: int):
    """Training values, responses, query values, r(query), noisy Y(query)."""
    rng = np.random.default_rng([cfg.seed, rep])
    grid = Grid(cfg.p)
    w = grid.weights
    if cfg.design == "brownian":
        values = _brownian_values(n_max, cfg.p, rng)
        query = _brownian_values(1, cfg.p, rng)[0]
    else:  # onedim
        u = rng.uniform(-1.0, 1.0, size=n_max + 1)
        base = np.ones(cfg.p)
        values = u[:n_max, None] * base[None, :]
        query = u[n_max] * base
    signal = (values * values) @ w
    r_query = float((query * query) @ w)
    eps = rng.normal(0.0, cfg.noise_sd, size=n_max + 1)
    y = signal + eps[:n_max]
    return values, y, query, r_query, r_query + float(eps[n_max])


def _make_dataset(grid: Grid, values: np.ndarray, y: np.ndarray) -> Dataset:
    return Dataset(tuple(Curve(grid, v) for v in values), y)


def _cell_state(
    rc: _ResolvedCell,
    grid: Grid,
    values: np.ndarray,
    y: np.ndarray,
    query: Curve,
):
    data = _make_dataset(grid, values[: rc.n], y[: rc.n])
    spec = SemiNormSpec(rc.settings.seminorm, rc.settings.seminorm_count)
    seminorm = fit_seminorm(spec, data)
    kernel = get_kernel(rc.settings.kernel)
    c_val, nu_val = rc.settings.C, rc.settings.nu
    if rc.settings.use_cv:
        report = cv_select(data, CVGrid(), rc.settings.l, kernel, spec, seminorm)
        c_val, nu_val = report.selected
    plan = BandwidthPlan.frozen(c_val, nu_val)
    return init_state(query, data, rc.settings.l, kernel, plan, seminorm)


# ---------------------------------------------------------------------------
# Report containers


def _write_csv(path_or_file, header_comments, colnames, rows) -> None:
    def emit(fh):
        for line in header_comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(colnames) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def config_header(config: dict) -> tuple[str, ...]:
    return tuple(f"{k}={v}" for k, v in config.items())


@dataclass(frozen=True)
class CellSummary:
    name: str
    params: dict
    mean: float
    sd: float
    count: int
    excluded: int


def _summarize(name: str, params: dict, column: np.ndarray) -> CellSummary:
    ok = np.isfinite(column)
    vals = column[ok]
    mean = float(np.mean(vals)) if vals.size else float("nan")
    sd = float(np.std(vals, ddof=1)) if vals.size > 1 else float("nan")
    return CellSummary(name, params, mean, sd, int(vals.size), int((~ok).sum()))


@dataclass(frozen=True, eq=False)
class StudyReport:
    """Per-cell summaries plus the per-replication records behind them."""

    kind: str
    config: dict
    cells: tuple[CellSummary, ...]
    records: np.ndarray  # (replications, n_cells); NaN marks an excluded rep
    extras: dict = field(default_factory=dict)

    def to_csv(self, path: Union[str, Path]) -> None:
        rows = [
            (
                c.name,
                ";".join(f"{k}={v}" for k, v in c.params.items()),
                c.mean,
                c.sd,
                c.count,
                c.excluded,
            )
            for c in self.cells
        ]
        _write_csv(
            path,
            config_header(self.config),
            ("cell", "params", "mean", "sd", "count", "excluded"),
            rows,
        )

    def records_to_csv(self, path: Union[str, Path]) -> None:
        names = [c.name for c in self.cells]
        rows = [
            [rep] + [self.records[rep, j] for j in range(len(names))]
            for rep in range(self.records.shape[0])
        ]
        _write_csv(path, config_header(self.config), ["rep"] + names, rows)

    def series(self) -> dict:
        """Plot-data: x is the cell index, y the cell mean."""
        xs = np.arange(len(self.cells), dtype=float)
        ys = np.array([c.mean for c in self.cells])
        return {"cell_means": (xs, ys)}

    def series_to_csv(self, path: Union[str, Path]) -> None:
        rows = []
        for name, (xs, ys) in self.series().items():
            rows.extend((name, float(x), float(y)) for x, y in zip(xs, ys))
        _write_csv(path, config_header(self.config), ("series", "x", "y"), rows)


# ---------------------------------------------------------------------------
# MSPE study


def _mspe_rep(args) -> list[float]:
    cfg, cells, n_max, rep = args
    values, y, query_values, _, y_query = _simulate_rep(cfg, n_max, rep)
    grid = Grid(cfg.p)
    query = Curve(grid, query_values)
    out = []
    for rc in cells:
        try:
            est = predict(_cell_state(rc, grid, values, y, query))
            out.append((est - y_query) ** 2)
        except (EmptyNeighborhoodError, DegenerateCdfError):
            out.append(float("nan"))
    return out


def mspe_study(cfg: ExperimentConfig, cells: Sequence[Cell]) -> StudyReport:
    """Mean/sd of the squared prediction error for a new curve, per cell.

    Every replication simulates one training sample (shared across cells;
    cells with smaller n use a prefix) and one new noisy observation whose
    response is predicted.
    """
    resolved = _resolve_cells(cfg, cells)
    if not resolved:
        raise ValueError("mspe_study needs at least one cell")
    n_max = max(rc.n for rc in resolved)
    tasks = [(cfg, resolved, n_max, rep) for rep in range(cfg.replications)]
    rows = _run_tasks(_mspe_rep, tasks, cfg.n_jobs)
    records = np.asarray(rows, dtype=float)
    summaries = tuple(
        _summarize(
            rc.name,
            {"n": rc.n, **_settings_params(rc.settings)},
            records[:, j],
        )
        for j, rc in enumerate(resolved)
    )
    return StudyReport("mspe", cfg.as_dict(), summaries, records)


def _settings_params(s: EstimatorSettings) -> dict:
    return {
        "l": s.l,
        "kernel": s.kernel,
        "seminorm": s.seminorm,
        "seminorm_count": s.seminorm_count,
        "C": s.C,
        "nu": s.nu,
        "use_cv": s.use_cv,
    }


def _run_tasks(worker, tasks, n_jobs):
    jobs = resolve_jobs(n_jobs)
    if jobs <= 1:
        return [worker(t) for t in tasks]
    chunk = max(1, len(tasks) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(worker, tasks, chunksize=chunk))


# ---------------------------------------------------------------------------
# Coverage study


@dataclass(frozen=True, eq=False)
class CoverageReport:
    """Empirical confidence-interval coverage and the standardized pivots."""

    config: dict
    alpha: float
    coverage: float
    covered: int
    included: int
    excluded: int
    pivots: np.ndarray
    records: np.ndarray  # (replications, 3): covered flag, pivot, width

    @property
    def pivot_skewness(self) -> float:
        return float(_skew(self.pivots))

    @property
    def pivot_excess_kurtosis(self) -> float:
        return float(_kurtosis(self.pivots))

    def to_csv(self, path: Union[str, Path]) -> None:
        rows = [
            ("alpha", self.alpha),
            ("coverage", self.coverage),
            ("covered", self.covered),
            ("included", self.included),
            ("excluded", self.excluded),
            ("pivot_skewness", self.pivot_skewness),
            ("pivot_excess_kurtosis", self.pivot_excess_kurtosis),
        ]
        _write_csv(path, config_header(self.config), ("metric", "value"), rows)

    def records_to_csv(self, path: Union[str, Path]) -> None:
        rows = [
            (rep, self.records[rep, 0], self.records[rep, 1], self.records[rep, 2])
            for rep in range(self.records.shape[0])
        ]
        _write_csv(
            path,
            config_header(self.config),
            ("rep", "covered", "pivot", "width"),
            rows,
        )

    def series(self) -> dict:
        xs = np.arange(self.pivots.size, dtype=float)
        return {"pivots": (xs, self.pivots.astype(float))}

    def series_to_csv(self, path: Union[str, Path]) -> None:
        rows = []
        for name, (xs, ys) in self.series().items():
            rows.extend((name, float(x), float(y)) for x, y in zip(xs, ys))
        _write_csv(path, config_header(self.config), ("series", "x", "y"), rows)


def _coverage_rep(args) -> tuple[float, float, float]:
    cfg, rc, alpha, rep = args
    values, y, query_values, r_query, _ = _simulate_rep(cfg, rc.n, rep)
    grid = Grid(cfg.p)
    query = Curve(grid, query_values)
    nan = float("nan")
    try:
        state = _cell_state(rc, grid, values, y, query)
        res = prediction_result(state, alpha)
        diag = res.diagnostics
        if diag["sigma2"] is None or diag["sigma2"] <= 0.0:
            return (nan, nan, nan)
        pivot = (
            np.sqrt(state.n * diag["cdf_at_last_bandwidth"])
            * np.sqrt(
                diag["beta1"] * diag["m1"] ** 2 / (diag["m2"] * diag["sigma2"])
            )
            * (res.estimate - r_query)
        )
        covered = float(res.ci_low <= r_query <= res.ci_high)
        return (covered, float(pivot), res.ci_high - res.ci_low)
    except (EmptyNeighborhoodError, DegenerateCdfError):
        return (nan, nan, nan)


def coverage_study(cfg: ExperimentConfig, alpha: float) -> CoverageReport:
    """Coverage of the asymptotic band for r(query) plus the pivot sample.

    Replications with a degenerate variance estimate or an empty
    neighborhood are excluded and counted.
    """
    if cfg.settings.l != 0.0:
        raise ValueError("coverage_study requires l = 0")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    rc = _resolve_cells(cfg, [Cell("coverage")])[0]
    tasks = [(cfg, rc, alpha, rep) for rep in range(cfg.replications)]
    rows = _run_tasks(_coverage_rep, tasks, cfg.n_jobs)
    records = np.asarray(rows, dtype=float)
    ok = np.isfinite(records[:, 0])
    covered = int(np.nansum(records[ok, 0]))
    included = int(ok.sum())
    pivots = records[ok, 1]
    return CoverageReport(
        config={**cfg.as_dict(), "alpha": alpha},
        alpha=alpha,
        coverage=covered / included if included else float("nan"),
        covered=covered,
        included=included,
        excluded=int((~ok).sum()),
        pivots=pivots,
        records=records,
    )


# ---------------------------------------------------------------------------
# Rate check


@dataclass(frozen=True, eq=False)
class RateReport:
    """Monte Carlo MSE against n and the fitted log-log slope."""

    config: dict
    ns: tuple[int, ...]
    mse: np.ndarray
    slope: float
    kappa_hat: float
    target_slope: float
    records: np.ndarray

    def to_csv(self, path: Union[str, Path]) -> None:
        rows = [(n, float(m)) for n, m in zip(self.ns, self.mse)]
        rows.append(("slope", self.slope))
        rows.append(("kappa_hat", self.kappa_hat))
        rows.append(("target_slope", self.target_slope))
        _write_csv(path, config_header(self.config), ("n", "mse"), rows)

    def records_to_csv(self, path: Union[str, Path]) -> None:
        names = [f"n={n}" for n in self.ns]
        rows = [
            [rep] + [self.records[rep, j] for j in range(len(names))]
            for rep in range(self.records.shape[0])
        ]
        _write_csv(path, config_header(self.config), ["rep"] + names, rows)

    def series(self) -> dict:
        xs = np.asarray(self.ns, dtype=float)
        return {"mse_vs_n": (xs, self.mse.astype(float))}

    def series_to_csv(self, path: Union[str, Path]) -> None:
        rows = []
        for name, (xs, ys) in self.series().items():
            rows.extend((name, float(x), float(y)) for x, y in zip(xs, ys))
        _write_csv(path, config_header(self.config), ("series", "x", "y"), rows)


def estimate_small_ball_exponent(
    distances: np.ndarray, lo_quantile: float = 0.05, hi_quantile: float = 0.5
) -> float:
    """Slope of log empirical CDF against log distance over a quantile window."""
    d = np.sort(np.asarray(distances, dtype=float))
    n = d.size
    lo = max(0, int(lo_quantile * n))
    hi = max(lo + 2, int(hi_quantile * n))
    idx = np.arange(lo, min(hi, n))
    x = d[idx]
    keep = x > 0
    if keep.sum() < 2:
        return float("nan")
    logs = np.log(x[keep])
    ecdf = np.log((idx[keep] + 1) / n)
    slope = np.polyfit(logs, ecdf, 1)[0]
    return float(slope)


def _rate_rep(args) -> list[float]:
    cfg, cells, n_max, rep = args
    values, y, query_values, r_query, _ = _simulate_rep(cfg, n_max, rep)
    grid = Grid(cfg.p)
    query = Curve(grid, query_values)
    out = []
    for rc in cells:
        try:
            state = _cell_state(rc, grid, values, y, query)
            est = predict(state)
            out.append((est - r_query) ** 2)
        except (EmptyNeighborhoodError, DegenerateCdfError):
            out.append(float("nan"))
    # small-ball exponent from the largest cell's distance sample
    largest = cells[-1]
    spec = SemiNormSpec(largest.settings.seminorm, largest.settings.seminorm_count)
    data = _make_dataset(grid, values[: largest.n], y[: largest.n])
    seminorm = fit_seminorm(spec, data)
    d = distances_to(seminorm, query, values[: largest.n])
    out.append(estimate_small_ball_exponent(d))
    return out


def rate_check(ns: Sequence[int], cfg: ExperimentConfig) -> RateReport:
    """Monte Carlo MSE of the estimate of r(query) across sample sizes.

    Reports the least-squares slope of log MSE against log n, together with
    a small-ball exponent estimate and the rate it implies (informative:
    the asymptotic exponent is -2/(2 + kappa)).
    """
    ns = tuple(sorted(int(n) for n in ns))
    if len(ns) < 3:
        raise ValueError("rate_check needs at least 3 sample sizes")
    cells = _resolve_cells(cfg, [Cell(f"n={n}", n=n) for n in ns])
    n_max = max(ns)
    tasks = [(cfg, cells, n_max, rep) for rep in range(cfg.replications)]
    rows = _run_tasks(_rate_rep, tasks, cfg.n_jobs)
    full = np.asarray(rows, dtype=float)
    records = full[:, : len(ns)]
    kappa_samples = full[:, len(ns)]
    mse = np.nanmean(records, axis=0)
    slope = float(np.polyfit(np.log(ns), np.log(mse), 1)[0])
    kappa_hat = float(np.nanmean(kappa_samples))
    target = -2.0 / (2.0 + kappa_hat) if np.isfinite(kappa_hat) else float("nan")
    return RateReport(
        config=cfg.as_dict(),
        ns=ns,
        mse=mse,
        slope=slope,
        kappa_hat=kappa_hat,
        target_slope=target,
        records=records,
    )


# ---------------------------------------------------------------------------
# Timing benchmark


@dataclass(frozen=True, eq=False)
class TimingReport:
    """Cumulative wall time per arrival for the streaming and refit arms."""

    config: dict
    n0: int
    arrivals: np.ndarray
    cumulative_recursive: np.ndarray
    cumulative_batch: np.ndarray
    checkpoints: tuple[int, ...]

    def checkpoint_times(self) -> list[tuple[int, float, float]]:
        out = []
        for n_new in self.checkpoints:
            idx = n_new - 1
            out.append(
                (
                    n_new,
                    float(self.cumulative_recursive[idx]),
                    float(self.cumulative_batch[idx]),
                )
            )
        return out

    def ratio(self, n_new: Optional[int] = None) -> float:
        idx = (n_new or int(self.arrivals[-1])) - 1
        return float(self.cumulative_batch[idx] / self.cumulative_recursive[idx])

    def growth_exponents(self) -> tuple[float, float]:
        """Log-log slopes of cumulative time against checkpoint N."""
        xs = np.log(np.asarray(self.checkpoints, dtype=float))
        rec = np.log([self.cumulative_recursive[n - 1] for n in self.checkpoints])
        bat = np.log([self.cumulative_batch[n - 1] for n in self.checkpoints])
        return (
            float(np.polyfit(xs, rec, 1)[0]),
            float(np.polyfit(xs, bat, 1)[0]),
        )

    def to_csv(self, path: Union[str, Path]) -> None:
        rows = [
            (int(a), float(r), float(b))
            for a, r, b in zip(
                self.arrivals, self.cumulative_recursive, self.cumulative_batch
            )
        ]
        _write_csv(
            path,
            config_header(self.config),
            ("arrival", "cumulative_recursive", "cumulative_batch"),
            rows,
        )

    def series(self) -> dict:
        xs = self.arrivals.astype(float)
        return {
            "cumulative_recursive": (xs, self.cumulative_recursive.astype(float)),
            "cumulative_batch": (xs, self.cumulative_batch.astype(float)),
        }

    def series_to_csv(self, path: Union[str, Path]) -> None:
        rows = []
        for name, (xs, ys) in self.series().items():
            rows.extend((name, float(x), float(y)) for x, y in zip(xs, ys))
        _write_csv(path, config_header(self.config), ("series", "x", "y"), rows)


def timing_benchmark(
    n0: int, N_values: Sequence[int], cfg: ExperimentConfig
) -> TimingReport:
    """Stream N new observations into a fitted state vs. refitting each time.

    Both arms see exactly the same observation sequence. The streaming arm
    pays one distance evaluation plus constant bookkeeping per arrival; the
    refit arm rebuilds the whole pipeline (semi-norm fit, all distances,
    bandwidth, kernel ratio) on the enlarged sample, with the per-observation
    bandwidth replaced by the final one as the non-recursive baseline does.
    Absolute seconds are hardware-bound; only ratios and growth exponents
    are meaningful.
    """
    if n0 < 1:
        raise ValueError(f"n0 must be >= 1, got {n0}")
    checkpoints = tuple(sorted(int(v) for v in N_values))
    if not checkpoints or checkpoints[0] < 1:
        raise ValueError("N_values must be positive")
    n_new = checkpoints[-1]
    values, y, query_values, _, _ = _simulate_rep(cfg, n0 + n_new, 0)
    grid = Grid(cfg.p)
    query = Curve(grid, query_values)
    curves = [Curve(grid, v) for v in values]
    kernel = get_kernel(cfg.settings.kernel)
    spec = SemiNormSpec(cfg.settings.seminorm, cfg.settings.seminorm_count)
    c_val, nu_val = cfg.settings.C, cfg.settings.nu

    # streaming arm
    base = Dataset(tuple(curves[:n0]), y[:n0])
    seminorm0 = fit_seminorm(spec, base)
    state = init_state(
        query,
        base,
        cfg.settings.l,
        kernel,
        BandwidthPlan.frozen(c_val, nu_val),
        seminorm0,
    )
    cum_rec = np.zeros(n_new)
    elapsed = 0.0
    for k in range(n_new):
        start = time.perf_counter()
        update_state(state, curves[n0 + k], y[n0 + k])
        try:
            predict(state)
        except EmptyNeighborhoodError:
            pass
        elapsed += time.perf_counter() - start
        cum_rec[k] = elapsed

    # refit arm: identical stream, full recomputation at each arrival
    prefixes = [Dataset(tuple(curves[: n0 + k + 1]), y[: n0 + k + 1]) for k in range(n_new)]
    cum_bat = np.zeros(n_new)
    elapsed = 0.0
    for k in range(n_new):
        data_k = prefixes[k]
        m = n0 + k + 1
        start = time.perf_counter()
        sem = fit_seminorm(spec, data_k)
        d = distances_to(sem, query, data_k.matrix)
        h = c_val * float(d.max()) * float(m) ** (-nu_val)
        weights = kernel(d / h) if h > 0 else np.zeros_like(d)
        den = float(np.sum(weights))
        if den > 0:
            _ = float(np.dot(weights, data_k.responses)) / den
        elapsed += time.perf_counter() - start
        cum_bat[k] = elapsed

    return TimingReport(
        config={**cfg.as_dict(), "n0": n0, "N_values": list(checkpoints)},
        n0=n0,
        arrivals=np.arange(1, n_new + 1),
        cumulative_recursive=cum_rec,
        cumulative_batch=cum_bat,
        checkpoints=checkpoints,
    )
