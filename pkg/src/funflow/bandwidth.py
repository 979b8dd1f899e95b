"""Bandwidth sequences and data-driven selection of (C, nu).

The selection criterion is the mean squared leave-one-out residual: for each
held-out observation the estimator is rebuilt on the remaining sample (kept
in original order and reindexed 1..n-1, with the bandwidth scale taken as the
leave-one-out maximum distance) and asked to predict the held-out response.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .curves import Dataset
from .errors import (
    DimensionError,
    EmptyNeighborhoodError,
    MissingResponseError,
)
from .estimator import Kernel
from .seminorms import FittedSemiNorm, SemiNormSpec, fit_seminorm

DEFAULT_C_VALUES = (0.5, 1.0, 2.0, 10.0)
DEFAULT_NU_VALUES = (1 / 10, 1 / 8, 1 / 6, 1 / 5, 1 / 4, 1 / 3, 1 / 2, 1.0)

# A pair whose leave-one-out skip fraction exceeds this is flagged.
SKIP_FLAG_FRACTION = 0.2


def bandwidth_sequence(C: float, nu: float, scale: float, n: int) -> np.ndarray:
    """h_i = C * scale * i**(-nu) for i = 1..n, strictly decreasing."""
    if C <= 0 or scale <= 0:
        raise ValueError(f"C and scale must be positive, got C={C}, scale={scale}")
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return C * scale * np.arange(1, n + 1, dtype=float) ** (-nu)


@dataclass(frozen=True)
class CVGrid:
    """Candidate (C, nu) values searched by cross-validation."""

    C_values: tuple = DEFAULT_C_VALUES
    nu_values: tuple = DEFAULT_NU_VALUES

    def __post_init__(self):
        if not self.C_values or not self.nu_values:
            raise ValueError("CV grid must be nonempty")
        if min(self.C_values) <= 0 or min(self.nu_values) <= 0:
            raise ValueError("CV grid values must be positive")
        object.__setattr__(self, "C_values", tuple(float(c) for c in self.C_values))
        object.__setattr__(self, "nu_values", tuple(float(v) for v in self.nu_values))


@dataclass(frozen=True)
class CVEntry:
    C: float
    nu: float
    score: float
    skipped: int
    flagged: bool


@dataclass(frozen=True)
class CVReport:
    """Scores for every grid pair plus the selected minimizer.

    Ties (scores equal up to numerical noise) resolve to the smallest C,
    then the smallest nu, so the selection is independent of the grid
    enumeration order.
    """

    entries: tuple[CVEntry, ...]
    selected: tuple[float, float]
    n: int
    fold_count: int = field(default=0)

    @property
    def selected_entry(self) -> CVEntry:
        for e in self.entries:
            if (e.C, e.nu) == self.selected:
                return e
        raise KeyError("selected pair missing from entries")

    def to_csv(self, path_or_file, header_lines: tuple[str, ...] = ()) -> None:
        def emit(fh):
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("C,nu,score,skipped,flagged\n")
            for e in self.entries:
                fh.write(
                    f"{e.C:.17g},{e.nu:.17g},{e.score:.17g},{e.skipped},"
                    f"{int(e.flagged)}\n"
                )

        if hasattr(path_or_file, "write"):
            emit(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                emit(fh)


def cv_select(
    data: Dataset,
    grid: CVGrid,
    l: float,
    kernel: Kernel,
    spec: SemiNormSpec,
    seminorm: Optional[FittedSemiNorm] = None,
) -> CVReport:
    """Pick (C, nu) minimizing the leave-one-out squared prediction error.

    The semi-norm is fitted once on the full sample (pass ``seminorm`` to
    reuse an existing fit); each fold then drops one observation from the
    kernel sums. Folds whose neighborhood is empty are skipped and counted;
    a pair with every fold empty scores +inf.
    """
    if data.responses is None:
        raise MissingResponseError("cross-validation requires responses")
    n = len(data)
    if n < 3:
        raise DimensionError(f"cross-validation needs n >= 3, got n={n}")
    if seminorm is None:
        seminorm = fit_seminorm(spec, data)
    y = data.responses
    coords = data.matrix @ seminorm.operator.T
    dist = cdist(coords, coords)

    pairs = [(c, v) for c in grid.C_values for v in grid.nu_values]
    sq_err = np.zeros(len(pairs))
    counts = np.zeros(len(pairs), dtype=int)
    positions = np.arange(1, n, dtype=float)  # reindexed 1..n-1
    keep = ~np.eye(n, dtype=bool)
    for i in range(n):
        d = dist[i, keep[i]]
        y_others = y[keep[i]]
        scale = float(d.max())
        d_sorted = np.sort(d)
        for j, (c_val, nu_val) in enumerate(pairs):
            if scale > 0.0:
                h = c_val * scale * positions ** (-nu_val)
                u = d / h
            else:
                h = np.zeros_like(positions)
                u = np.where(d == 0.0, 0.0, np.inf)
            k = kernel(u)
            if l > 0.0:
                f_h = np.searchsorted(d_sorted, h, side="right") / (n - 1)
                active = k > 0.0
                weights = np.where(
                    active, k / np.where(f_h > 0.0, f_h, 1.0) ** l, 0.0
                )
            else:
                weights = k
            den = float(np.sum(weights))
            if den <= 0.0:
                continue
            pred = float(np.dot(weights, y_others)) / den
            sq_err[j] += (y[i] - pred) ** 2
            counts[j] += 1

    scores = np.where(counts > 0, sq_err / np.maximum(counts, 1), np.inf)
    skipped = n - counts
    entries = tuple(
        CVEntry(
            C=pairs[j][0],
            nu=pairs[j][1],
            score=float(scores[j]),
            skipped=int(skipped[j]),
            flagged=bool(skipped[j] > SKIP_FLAG_FRACTION * n),
        )
        for j in range(len(pairs))
    )
    finite = [e for e in entries if math.isfinite(e.score)]
    if not finite:
        raise EmptyNeighborhoodError(
            "every grid pair had all leave-one-out neighborhoods empty"
        )
    best = min(e.score for e in finite)
    tie_tol = 1e-12 * max(1.0, float(np.mean(y * y)))
    tied = [e for e in finite if e.score <= best + tie_tol]
    winner = min(tied, key=lambda e: (e.C, e.nu))
    return CVReport(entries, (winner.C, winner.nu), n, fold_count=n)
