"""Semi-norms between curves: PCA, Fourier, spline-derivative, and PLS.

Each fitted semi-norm reduces to a linear map applied to the difference of
two curves followed by a Euclidean norm, so nonnegativity, symmetry, the
triangle inequality, and translation invariance hold by construction:

* ``pca``   - projections onto the top eigenfunctions of the empirical
  covariance operator of the sample.
* ``fou``   - coefficients of the first b elements of the orthonormal
  Fourier system {1, sqrt(2)cos(2*pi*t), sqrt(2)sin(2*pi*t), ...}.
* ``deriv`` - L2 distance between second derivatives of least-squares
  cubic B-spline fits with k equispaced interior knots.
* ``pls``   - projections onto orthonormalized PLS1 weight directions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.interpolate import BSpline

from .curves import Curve, Dataset, Grid
from .errors import (
    DimensionError,
    MissingResponseError,
    RankError,
    SnapshotError,
)

KINDS = ("pca", "fou", "deriv", "pls")
_DEFAULT_COUNTS = {"pca": 3, "fou": 8, "deriv": 8, "pls": 5}

# Relative eigenvalue / weight-norm threshold below which a direction is
# considered numerically absent from the sample.
_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class SemiNormSpec:
    """Which semi-norm to build and how many directions/knots it uses.

    ``count`` is the number of principal components (pca), Fourier basis
    elements (fou), interior spline knots (deriv), or PLS directions (pls).
    """

    kind: str
    count: Optional[int] = None
    center: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DimensionError(
                f"unknown semi-norm kind {self.kind!r}; expected one of {KINDS}"
            )
        if self.count is None:
            object.__setattr__(self, "count", _DEFAULT_COUNTS[self.kind])
        if self.count < 1:
            raise DimensionError(f"semi-norm count must be >= 1, got {self.count}")


@dataclass(frozen=True, eq=False)
class FittedSemiNorm:
    """A reusable distance functional between curves on one grid.

    ``operator`` maps curve values to coordinates whose Euclidean norm is the
    semi-norm of the curve; ``basis`` rows are the fitted directions (empty
    for the fixed-form deriv kind).
    """

    spec: SemiNormSpec
    grid: Grid
    operator: np.ndarray
    basis: np.ndarray
    eigenvalues: Optional[np.ndarray] = None


def distance(s: FittedSemiNorm, chi1: Curve, chi2: Curve) -> float:
    """Semi-norm of the difference of two curves on the fitting grid."""
    if chi1.grid != s.grid or chi2.grid != s.grid:
        raise DimensionError("curves must live on the semi-norm's fitting grid")
    return float(np.linalg.norm(s.operator @ (chi1.values - chi2.values)))


def distances_to(s: FittedSemiNorm, chi: Curve, matrix: np.ndarray) -> np.ndarray:
    """Distances from one query curve to each row of an (n, p) value matrix."""
    if chi.grid != s.grid:
        raise DimensionError("query curve must live on the semi-norm's fitting grid")
    if matrix.ndim != 2 or matrix.shape[1] != s.grid.p:
        raise DimensionError(
            f"value matrix must be (n, {s.grid.p}), got {matrix.shape}"
        )
    coords = (matrix - chi.values) @ s.operator.T
    return np.linalg.norm(coords, axis=1)


def _weighted_gram_schmidt(
    rows: np.ndarray, weights: np.ndarray, context: str
) -> np.ndarray:
    """Orthonormalize row vectors under the quadrature inner product."""
    out = []
    for row in rows:
        v = row.astype(float, copy=True)
        for u in out:
            v -= np.dot(weights, v * u) * u
        norm = np.sqrt(np.dot(weights, v * v))
        if norm <= _RANK_RTOL * max(1.0, np.sqrt(np.dot(weights, row * row))):
            raise RankError(f"{context}: direction is numerically dependent")
        out.append(v / norm)
    return np.stack(out)


def pca_eigenfunctions(
    data: Dataset, q: int, center: bool = False
) -> tuple[list[Curve], np.ndarray]:
    """Top-q eigenpairs of the empirical covariance operator of the sample.

    The operator maps u to the average of <X_i, u> X_i over the sample
    (curves are left uncentered unless ``center``). Returned directions are
    orthonormal under the trapezoid inner product, eigenvalues descending;
    signs are fixed so the first coordinate of meaningful size is positive.
    """
    if len(data) == 0:
        raise DimensionError("cannot fit PCA on an empty dataset")
    grid = data.grid
    if q > min(len(data), grid.p):
        raise RankError(
            f"q={q} exceeds min(n, p) = {min(len(data), grid.p)}"
        )
    x = data.matrix
    if center:
        x = x - x.mean(axis=0)
    w = grid.weights
    sqrt_w = np.sqrt(w)
    cov = (x.T @ x) / len(data)
    sym = sqrt_w[:, None] * cov * sqrt_w[None, :]
    eigvals, eigvecs = np.linalg.eigh(sym)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    scale = max(eigvals[0], 0.0)
    if q > 0 and (scale <= 0.0 or eigvals[q - 1] <= _RANK_RTOL * scale):
        rank = int(np.sum(eigvals > _RANK_RTOL * scale)) if scale > 0 else 0
        raise RankError(
            f"q={q} exceeds the numerical rank {rank} of the covariance"
        )
    directions = eigvecs[:, :q].T / sqrt_w[None, :]
    for j in range(q):
        lead = np.flatnonzero(np.abs(directions[j]) > 1e-8 * np.abs(directions[j]).max())
        if lead.size and directions[j, lead[0]] < 0:
            directions[j] = -directions[j]
    return [Curve(grid, d) for d in directions], eigvals[:q]


def pls_basis(data: Dataset, n_components: int, center: bool = False) -> list[Curve]:
    """PLS1 weight directions, orthonormalized under the L2 inner product.

    Each step takes the response-centered cross-covariance direction of the
    current (deflated) curve block, scores the curves along it, and deflates
    the curve block only. A vanishing cross-covariance (e.g. constant
    responses) or vanishing scores raise RankError.
    """
    if data.responses is None:
        raise MissingResponseError("PLS requires responses")
    if len(data) == 0:
        raise DimensionError("cannot fit PLS on an empty dataset")
    grid = data.grid
    if n_components > min(len(data), grid.p):
        raise RankError(
            f"K={n_components} exceeds min(n, p) = {min(len(data), grid.p)}"
        )
    x = data.matrix.astype(float, copy=True)
    if center:
        x = x - x.mean(axis=0)
    y = data.responses - data.responses.mean()
    w = grid.weights
    y_scale = float(np.max(np.abs(y)))
    x_scale = float(np.max(np.abs(x))) if x.size else 0.0
    weights_rows = []
    for j in range(n_components):
        direction = y @ x  # cross-covariance direction in curve space
        norm = np.sqrt(np.dot(w, direction * direction))
        if norm <= _RANK_RTOL * max(1.0, y_scale * x_scale * len(data)):
            raise RankError(
                f"PLS cross-covariance vanished at component {j + 1}"
            )
        direction = direction / norm
        scores = (x * direction[None, :]) @ w
        score_sq = float(np.dot(scores, scores))
        if score_sq <= (_RANK_RTOL * max(1.0, x_scale)) ** 2:
            raise RankError(f"PLS scores vanished at component {j + 1}")
        loading = (scores @ x) / score_sq
        x = x - np.outer(scores, loading)
        weights_rows.append(direction)
    ortho = _weighted_gram_schmidt(np.stack(weights_rows), w, "pls")
    return [Curve(grid, row) for row in ortho]


def fourier_system(grid: Grid, b: int) -> np.ndarray:
    """First b elements of the interleaved orthonormal Fourier system on [0,1]."""
    t = grid.points
    rows = np.empty((b, grid.p))
    rows[0] = 1.0
    for j in range(1, b):
        harmonic = (j + 1) // 2
        if j % 2 == 1:
            rows[j] = np.sqrt(2.0) * np.cos(2.0 * np.pi * harmonic * t)
        else:
            rows[j] = np.sqrt(2.0) * np.sin(2.0 * np.pi * harmonic * t)
    return rows


def _bspline_design(grid: Grid, interior_knots: int) -> tuple[np.ndarray, np.ndarray]:
    """Design matrices (value and second derivative) for a clamped cubic basis."""
    degree = 3
    n_basis = interior_knots + degree + 1
    if grid.p < n_basis:
        raise RankError(
            f"need p >= {n_basis} grid points for k={interior_knots} interior knots"
        )
    interior = np.linspace(0.0, 1.0, interior_knots + 2)[1:-1]
    knots = np.concatenate(
        (np.zeros(degree + 1), interior, np.ones(degree + 1))
    )
    design = BSpline.design_matrix(grid.points, knots, degree).toarray()
    second = np.empty((grid.p, n_basis))
    coeff = np.zeros(n_basis)
    for j in range(n_basis):
        coeff[:] = 0.0
        coeff[j] = 1.0
        second[:, j] = BSpline(knots, coeff.copy(), degree).derivative(2)(grid.points)
    return design, second


def spline_second_derivative(chi: Curve, interior_knots: int) -> Curve:
    """Second derivative of the least-squares cubic B-spline fit of a curve."""
    design, second = _bspline_design(chi.grid, interior_knots)
    coeff, _, rank, _ = np.linalg.lstsq(design, chi.values, rcond=None)
    if rank < design.shape[1]:
        raise RankError("rank-deficient spline design matrix")
    return Curve(chi.grid, second @ coeff)


def fit_seminorm(spec: SemiNormSpec, data: Dataset) -> FittedSemiNorm:
    """Build a reusable distance functional from a spec and a dataset.

    Deterministic given (spec, data) up to sign of fitted directions, which
    distances do not see.
    """
    if len(data) == 0:
        raise DimensionError("cannot fit a semi-norm on an empty dataset")
    grid = data.grid
    w = grid.weights
    if spec.kind == "pca":
        curves_basis, eigvals = pca_eigenfunctions(data, spec.count, spec.center)
        basis = np.stack([c.values for c in curves_basis])
        operator = basis * w[None, :]
        return FittedSemiNorm(spec, grid, operator, basis, eigvals)
    if spec.kind == "fou":
        if spec.count > grid.p:
            raise RankError(f"b={spec.count} exceeds grid size {grid.p}")
        basis = fourier_system(grid, spec.count)
        operator = basis * w[None, :]
        return FittedSemiNorm(spec, grid, operator, basis)
    if spec.kind == "deriv":
        design, second = _bspline_design(grid, spec.count)
        gram = design.T @ design
        try:
            solve = np.linalg.solve(gram, design.T)
        except np.linalg.LinAlgError:
            raise RankError("rank-deficient spline design matrix") from None
        operator = np.sqrt(w)[:, None] * (second @ solve)
        return FittedSemiNorm(spec, grid, operator, np.empty((0, grid.p)))
    # pls
    curves_basis = pls_basis(data, spec.count, spec.center)
    basis = np.stack([c.values for c in curves_basis])
    operator = basis * w[None, :]
    return FittedSemiNorm(spec, grid, operator, basis)


SEMINORM_FORMAT = "funflow-seminorm"
SEMINORM_VERSION = 1


def seminorm_to_blob(s: FittedSemiNorm) -> dict:
    """JSON-serializable description from which the semi-norm can be rebuilt."""
    return {
        "format": SEMINORM_FORMAT,
        "version": SEMINORM_VERSION,
        "kind": s.spec.kind,
        "count": s.spec.count,
        "center": s.spec.center,
        "grid_p": s.grid.p,
        "operator": s.operator.tolist(),
        "basis": s.basis.tolist(),
        "eigenvalues": None if s.eigenvalues is None else s.eigenvalues.tolist(),
    }


def seminorm_from_blob(blob: dict) -> FittedSemiNorm:
    if blob.get("format") != SEMINORM_FORMAT:
        raise SnapshotError("not a semi-norm blob")
    if blob.get("version") != SEMINORM_VERSION:
        raise SnapshotError(
            f"unsupported semi-norm blob version {blob.get('version')!r}"
        )
    spec = SemiNormSpec(blob["kind"], blob["count"], blob.get("center", False))
    grid = Grid(blob["grid_p"])
    operator = np.asarray(blob["operator"], dtype=float)
    basis = np.asarray(blob["basis"], dtype=float).reshape(-1, grid.p)
    eig = blob.get("eigenvalues")
    return FittedSemiNorm(
        spec,
        grid,
        operator,
        basis,
        None if eig is None else np.asarray(eig, dtype=float),
    )


def save_seminorm(s: FittedSemiNorm, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(seminorm_to_blob(s)))


def load_seminorm(path: Union[str, Path]) -> FittedSemiNorm:
    try:
        blob = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"corrupt semi-norm blob: {exc}") from None
    return seminorm_from_blob(blob)
