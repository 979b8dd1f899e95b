"""Figure rendering for CLI reports.

Every study report rendered by the CLI gets a PNG next to its CSV output.
Rendering is headless (Agg) and side-effect free beyond the written file.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bandwidth import CVReport
from .experiments import CoverageReport, RateReport, StudyReport, TimingReport

PathLike = Union[str, Path]


def render_mspe(report: StudyReport, path: PathLike) -> None:
    names = [c.name for c in report.cells]
    means = np.array([c.mean for c in report.cells])
    sds = np.array([c.sd for c in report.cells])
    counts = np.array([max(c.count, 1) for c in report.cells])
    stderr = sds / np.sqrt(counts)
    fig, ax = plt.subplots(figsize=(6.5, 4))
    xs = np.arange(len(names))
    ax.errorbar(xs, means, yerr=stderr, fmt="o-", capsize=3)
    ax.set_xticks(xs)
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("mean squared prediction error")
    ax.set_title("MSPE by cell (bars: standard error of the mean)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_rate(report: RateReport, path: PathLike) -> None:
    ns = np.asarray(report.ns, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(ns, report.mse, "o", label="Monte Carlo MSE")
    anchor = report.mse[0] * (ns / ns[0]) ** report.slope
    ax.loglog(ns, anchor, "-", label=f"fit, slope {report.slope:.3f}")
    if np.isfinite(report.target_slope):
        target = report.mse[0] * (ns / ns[0]) ** report.target_slope
        ax.loglog(
            ns, target, "--", label=f"implied rate, slope {report.target_slope:.3f}"
        )
    ax.set_xlabel("sample size n")
    ax.set_ylabel("MSE")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_coverage(report: CoverageReport, path: PathLike) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    pivots = report.pivots
    if pivots.size:
        ax.hist(pivots, bins=max(10, pivots.size // 20), density=True, alpha=0.6)
        grid = np.linspace(min(-4, pivots.min()), max(4, pivots.max()), 400)
        ax.plot(grid, np.exp(-grid**2 / 2) / np.sqrt(2 * np.pi), "k-", lw=1)
    ax.set_xlabel("standardized pivot")
    ax.set_ylabel("density")
    ax.set_title(
        f"coverage {report.coverage:.3f} at nominal {1 - report.alpha:.2f} "
        f"({report.included} kept, {report.excluded} excluded)"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_timing(report: TimingReport, path: PathLike) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = report.arrivals
    ax.loglog(xs, report.cumulative_recursive, label="streaming update")
    ax.loglog(xs, report.cumulative_batch, label="full refit")
    ax.set_xlabel("new observations")
    ax.set_ylabel("cumulative seconds")
    ax.set_title(f"cumulative time, final ratio {report.ratio():.1f}x")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_cv(report: CVReport, path: PathLike) -> None:
    c_values = sorted({e.C for e in report.entries})
    nu_values = sorted({e.nu for e in report.entries})
    scores = np.full((len(c_values), len(nu_values)), np.nan)
    for e in report.entries:
        scores[c_values.index(e.C), nu_values.index(e.nu)] = e.score
    fig, ax = plt.subplots(figsize=(6.5, 4))
    finite = scores[np.isfinite(scores)]
    image = ax.imshow(scores, aspect="auto", origin="lower", cmap="viridis")
    fig.colorbar(image, ax=ax, label="CV score")
    ax.set_xticks(range(len(nu_values)))
    ax.set_xticklabels([f"{v:.3g}" for v in nu_values])
    ax.set_yticks(range(len(c_values)))
    ax.set_yticklabels([f"{c:.3g}" for c in c_values])
    ax.set_xlabel("nu")
    ax.set_ylabel("C")
    sel_c, sel_nu = report.selected
    ax.plot(nu_values.index(sel_nu), c_values.index(sel_c), "r*", markersize=14)
    ax.set_title(
        f"leave-one-out scores, selected C={sel_c:g}, nu={sel_nu:g}"
        + ("" if finite.size == len(scores.flat) else " (inf cells blank)")
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
