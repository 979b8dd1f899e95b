"""Curve containers, CSV ingestion, L2 quadrature, and simulation designs.

A curve is a function on [0, 1] observed on a shared uniform grid. All L2
quantities use the trapezoid rule on that grid, which is exact for the
piecewise-linear interpolant of the sampled values.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DimensionError, FormatError, ParseError

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Grid:
    """Uniform grid of p points on [0, 1], endpoints included."""

    p: int
    points: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.p < 2:
            raise DimensionError(f"grid needs at least 2 points, got {self.p}")
        if self.points is None:
            object.__setattr__(self, "points", np.linspace(0.0, 1.0, self.p))
        else:
            pts = np.array(self.points, dtype=float)
            if pts.shape != (self.p,):
                raise DimensionError(
                    f"grid expects {self.p} points, got shape {pts.shape}"
                )
            if not np.allclose(pts, np.linspace(0.0, 1.0, self.p), atol=1e-10):
                raise FormatError("grid points must be uniform on [0, 1]")
            object.__setattr__(self, "points", pts)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights (sum to 1)."""
        step = 1.0 / (self.p - 1)
        w = np.full(self.p, step)
        w[0] = w[-1] = step / 2.0
        return w

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("Grid", self.p))


@dataclass(frozen=True, eq=False)
class Curve:
    """One functional observation: values on a shared Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.p,):
            raise DimensionError(
                f"curve has {vals.shape} values for a grid of {self.grid.p} points"
            )
        if not np.all(np.isfinite(vals)):
            raise ParseError("curve values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered curves on one Grid, with optional responses.

    Ordering is significant: the arrival index of an observation drives its
    bandwidth in the recursive estimator.
    """

    curves: tuple[Curve, ...]
    responses: Optional[np.ndarray] = None

    def __post_init__(self):
        curves = tuple(self.curves)
        if not curves:
            object.__setattr__(self, "curves", curves)
            return
        grid = curves[0].grid
        for c in curves[1:]:
            if c.grid != grid:
                raise DimensionError("all curves in a dataset must share one grid")
        object.__setattr__(self, "curves", curves)
        if self.responses is not None:
            y = np.array(self.responses, dtype=float)
            if y.shape != (len(curves),):
                raise DimensionError(
                    f"{len(curves)} curves but {y.size} responses"
                )
            if not np.all(np.isfinite(y)):
                raise ParseError("responses must be finite")
            y.setflags(write=False)
            object.__setattr__(self, "responses", y)

    def __len__(self) -> int:
        return len(self.curves)

    @property
    def grid(self) -> Grid:
        if not self.curves:
            raise DimensionError("empty dataset has no grid")
        return self.curves[0].grid

    @property
    def matrix(self) -> np.ndarray:
        """Curves stacked as an (n, p) array."""
        return np.stack([c.values for c in self.curves])

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = list(indices)
        y = None if self.responses is None else self.responses[idx]
        return Dataset(tuple(self.curves[i] for i in idx), y)


def _parse_cell(text: str, row: int, col: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(
            f"non-numeric value {text!r} at row {row}, column {col}"
        ) from None


def load_dataset(
    curves_path: PathLike, responses_path: Optional[PathLike] = None
) -> Dataset:
    """Read curves (one per CSV row) and optional single-column responses.

    The curves file may start with an optional header row ``# grid: t1,...,tp``;
    when present it must describe the same uniform grid implied by the column
    count. Ragged rows raise FormatError, non-numeric cells ParseError, and a
    row-count mismatch with the responses file DimensionError.
    """
    rows: list[list[float]] = []
    header_grid: Optional[list[float]] = None
    with open(curves_path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record:
                continue
            if lineno == 1 and record[0].lstrip().startswith("# grid:"):
                first = record[0].split(":", 1)[1]
                cells = [first] + record[1:]
                header_grid = [
                    _parse_cell(c.strip(), lineno, j + 1) for j, c in enumerate(cells)
                ]
                continue
            rows.append(
                [_parse_cell(c.strip(), lineno, j + 1) for j, c in enumerate(record)]
            )
    if not rows:
        raise FormatError(f"no curves found in {curves_path}")
    width = len(rows[0])
    if width < 2:
        raise FormatError("curves need at least 2 grid points per row")
    for i, r in enumerate(rows):
        if len(r) != width:
            raise FormatError(
                f"ragged row {i + 1}: expected {width} cells, got {len(r)}"
            )
    if header_grid is not None and len(header_grid) != width:
        raise FormatError(
            f"grid header has {len(header_grid)} points but rows have {width}"
        )
    grid = Grid(width, None if header_grid is None else np.asarray(header_grid))
    curves = tuple(Curve(grid, np.asarray(r)) for r in rows)

    responses = None
    if responses_path is not None:
        vals: list[float] = []
        with open(responses_path, newline="") as fh:
            for lineno, record in enumerate(csv.reader(fh), start=1):
                if not record:
                    continue
                if len(record) != 1:
                    raise FormatError(
                        f"responses file must have one value per row (row {lineno})"
                    )
                vals.append(_parse_cell(record[0].strip(), lineno, 1))
        if len(vals) != len(curves):
            raise DimensionError(
                f"{len(curves)} curves but {len(vals)} responses"
            )
        responses = np.asarray(vals)
    return Dataset(curves, responses)


def save_dataset(
    data: Dataset,
    curves_path: PathLike,
    responses_path: Optional[PathLike] = None,
    grid_header: bool = False,
) -> None:
    """Write a dataset back to the CSV formats accepted by load_dataset."""
    with open(curves_path, "w", newline="") as fh:
        if grid_header:
            pts = ",".join(format(t, ".17g") for t in data.grid.points)
            fh.write(f"# grid: {pts}\n")
        for c in data.curves:
            fh.write(",".join(format(v, ".17g") for v in c.values) + "\n")
    if responses_path is not None:
        if data.responses is None:
            raise DimensionError("dataset has no responses to write")
        with open(responses_path, "w", newline="") as fh:
            for y in data.responses:
                fh.write(format(y, ".17g") + "\n")


def inner_product(f: Curve, g: Curve) -> float:
    """Trapezoid approximation of the L2 inner product of two curves."""
    if f.grid != g.grid:
        raise DimensionError("inner_product requires curves on the same grid")
    return float(np.dot(f.grid.weights, f.values * g.values))


def target_operator(chi: Curve) -> float:
    """Integral of the squared curve, the regression operator of the simulations."""
    return inner_product(chi, chi)


def _brownian_values(n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    increments = rng.normal(0.0, np.sqrt(1.0 / (p - 1)), size=(n, p - 1))
    values = np.zeros((n, p))
    np.cumsum(increments, axis=1, out=values[:, 1:])
    return values


def simulate_brownian(n: int, p: int, seed: int) -> list[Curve]:
    """n standard Brownian motion paths on a p-point grid, X(0) = 0.

    Built by cumulative sums of independent N(0, 1/(p-1)) increments, so the
    finite-dimensional law on the grid is exact. Deterministic given the seed.
    """
    if n < 1:
        raise DimensionError(f"need n >= 1 curves, got {n}")
    grid = Grid(p)
    values = _brownian_values(n, p, np.random.default_rng(seed))
    return [Curve(grid, v) for v in values]


def simulate_regression_sample(
    n: int, p: int, noise_sd: float, seed: int
) -> Dataset:
    """Brownian curves with responses Y = integral of X^2 plus Gaussian noise."""
    if noise_sd < 0:
        raise ParseError(f"noise_sd must be >= 0, got {noise_sd}")
    curve_seq, noise_seq = np.random.SeedSequence(seed).spawn(2)
    grid = Grid(p)
    values = _brownian_values(n, p, np.random.default_rng(curve_seq))
    curves = tuple(Curve(grid, v) for v in values)
    w = grid.weights
    signal = (values * values) @ w
    eps = np.random.default_rng(noise_seq).normal(0.0, noise_sd, size=n)
    return Dataset(curves, signal + eps)
