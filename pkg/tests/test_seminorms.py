import numpy as np
import pytest

from funflow.curves import Curve, Dataset, Grid, inner_product, simulate_brownian
from funflow.errors import DimensionError, MissingResponseError, RankError
from funflow.seminorms import (
    FittedSemiNorm,
    SemiNormSpec,
    distance,
    distances_to,
    fit_seminorm,
    fourier_system,
    load_seminorm,
    pca_eigenfunctions,
    pls_basis,
    save_seminorm,
    seminorm_from_blob,
    seminorm_to_blob,
    spline_second_derivative,
)

GRID = Grid(100)


def curve(values, grid=GRID):
    return Curve(grid, np.asarray(values, dtype=float))


def brownian_dataset(n, seed, responses=None):
    curves = tuple(simulate_brownian(n, GRID.p, seed))
    return Dataset(curves, responses)


@pytest.fixture(scope="module")
def sample():
    rng = np.random.default_rng(0)
    curves = tuple(simulate_brownian(40, GRID.p, 17))
    y = rng.normal(size=40)
    return Dataset(curves, y)


@pytest.fixture(scope="module")
def fitted(sample):
    return {
        "pca": fit_seminorm(SemiNormSpec("pca", 3), sample),
        "fou": fit_seminorm(SemiNormSpec("fou", 8), sample),
        "deriv": fit_seminorm(SemiNormSpec("deriv", 8), sample),
        "pls": fit_seminorm(SemiNormSpec("pls", 5), sample),
    }


class TestSpec:
    def test_defaults(self):
        assert SemiNormSpec("pca").count == 3
        assert SemiNormSpec("fou").count == 8
        assert SemiNormSpec("deriv").count == 8
        assert SemiNormSpec("pls").count == 5

    def test_unknown_kind(self):
        with pytest.raises(DimensionError):
            SemiNormSpec("wavelet")

    def test_count_positive(self):
        with pytest.raises(DimensionError):
            SemiNormSpec("pca", 0)


class TestPca:
    def test_rank_one_dataset(self):
        base = np.sin(2 * np.pi * GRID.points)
        data = Dataset(tuple(curve(c * base) for c in (1.0, -2.0, 0.5)))
        directions, eigvals = pca_eigenfunctions(data, 1)
        u = directions[0]
        norm = np.sqrt(inner_product(curve(base), curve(base)))
        aligned = np.minimum(
            np.abs(u.values - base / norm).max(),
            np.abs(u.values + base / norm).max(),
        )
        assert aligned < 1e-10
        # all curves equal to one function: first eigenvalue is its squared norm
        same = Dataset(tuple(curve(base) for _ in range(4)))
        _, vals = pca_eigenfunctions(same, 1)
        assert vals[0] == pytest.approx(norm**2, rel=1e-10)

    def test_rank_error_on_rank_one(self):
        base = np.cos(2 * np.pi * GRID.points)
        data = Dataset(tuple(curve(c * base) for c in (1.0, 2.0, 3.0)))
        with pytest.raises(RankError):
            pca_eigenfunctions(data, 2)

    def test_two_orthogonal_curves_tie(self):
        e1 = np.ones(GRID.p)
        e2 = np.sqrt(2) * np.cos(2 * np.pi * GRID.points)
        data = Dataset(tuple(curve(v) for v in (e1, e2, e1, e2)))
        directions, eigvals = pca_eigenfunctions(data, 2)
        # hand computation: covariance is (e1 e1' + e2 e2')/2, eigenvalues 1/2, 1/2
        assert eigvals[0] == pytest.approx(0.5, rel=1e-10)
        assert eigvals[1] == pytest.approx(0.5, rel=1e-10)
        # returned basis spans the same plane as (e1, e2)
        w = GRID.weights
        basis = np.stack([d.values for d in directions])
        for target in (e1, e2):
            coef = basis @ (w * target)
            residual = target - coef @ basis
            assert np.sqrt(residual @ (w * residual)) < 1e-8

    def test_eigenvalues_nonincreasing(self, sample):
        _, eigvals = pca_eigenfunctions(sample, 5)
        assert np.all(np.diff(eigvals) <= 1e-12)

    def test_orthonormal_under_inner_product(self, sample):
        directions, _ = pca_eigenfunctions(sample, 4)
        for i, a in enumerate(directions):
            for j, b in enumerate(directions):
                assert inner_product(a, b) == pytest.approx(
                    1.0 if i == j else 0.0, abs=1e-8
                )

    def test_q_exceeding_min_np(self, sample):
        with pytest.raises(RankError):
            pca_eigenfunctions(sample, 101)


class TestPls:
    def test_recovers_visible_direction(self):
        # isotropic two-direction sample: the cross-covariance direction is w
        e1 = np.ones(GRID.p)
        e2 = np.sqrt(2) * np.cos(2 * np.pi * GRID.points)
        w_true = 0.6 * e1 + 0.8 * e2
        curves = tuple(curve(v) for v in (e1, -e1, e2, -e2))
        y = np.array([inner_product(c, curve(w_true)) for c in curves])
        data = Dataset(curves, y)
        (direction,) = pls_basis(data, 1)
        norm = np.sqrt(inner_product(curve(w_true), curve(w_true)))
        aligned = min(
            np.abs(direction.values - w_true / norm).max(),
            np.abs(direction.values + w_true / norm).max(),
        )
        assert aligned < 1e-8
        # distances along the single direction match the projection magnitude
        s = fit_seminorm(SemiNormSpec("pls", 1), data)
        rng = np.random.default_rng(3)
        for _ in range(5):
            a = curve(rng.normal(size=GRID.p))
            b = curve(rng.normal(size=GRID.p))
            diff = curve(a.values - b.values)
            expected = abs(inner_product(diff, curve(w_true / norm)))
            assert distance(s, a, b) == pytest.approx(expected, abs=1e-8)

    def test_first_weight_is_cross_covariance_direction(self, sample):
        (first, *_) = pls_basis(sample, 2)
        y = sample.responses - sample.responses.mean()
        raw = y @ sample.matrix
        w = GRID.weights
        raw = raw / np.sqrt(raw @ (w * raw))
        aligned = min(np.abs(first.values - raw).max(), np.abs(first.values + raw).max())
        assert aligned < 1e-10

    def test_constant_responses_rank_error(self):
        data = brownian_dataset(10, 3, np.full(10, 2.5))
        with pytest.raises(RankError):
            pls_basis(data, 1)

    def test_requires_responses(self):
        data = brownian_dataset(10, 3)
        with pytest.raises(MissingResponseError):
            pls_basis(data, 1)

    def test_directions_orthonormal(self, sample):
        directions = pls_basis(sample, 5)
        for i, a in enumerate(directions):
            for j, b in enumerate(directions):
                assert inner_product(a, b) == pytest.approx(
                    1.0 if i == j else 0.0, abs=1e-8
                )


class TestSplineDerivative:
    def test_quadratic_curve(self):
        chi = curve(GRID.points**2)
        second = spline_second_derivative(chi, 8)
        assert np.abs(second.values - 2.0).max() < 1e-6

    def test_affine_curve(self):
        chi = curve(3.0 * GRID.points - 1.0)
        second = spline_second_derivative(chi, 8)
        assert np.abs(second.values).max() < 1e-6

    def test_cubic_curve(self):
        chi = curve(GRID.points**3)
        second = spline_second_derivative(chi, 8)
        assert np.abs(second.values - 6.0 * GRID.points).max() < 1e-6

    def test_insufficient_points(self):
        small = Grid(5)
        with pytest.raises(RankError):
            spline_second_derivative(Curve(small, np.zeros(5)), 8)


class TestDistance:
    def test_identity_gives_zero(self, fitted, sample):
        chi = sample.curves[0]
        for s in fitted.values():
            assert distance(s, chi, chi) == 0.0

    def test_fourier_unit_coefficient(self, fitted):
        chi1 = curve(np.sqrt(2) * np.cos(2 * np.pi * GRID.points))
        chi2 = curve(np.zeros(GRID.p))
        assert distance(fitted["fou"], chi1, chi2) == pytest.approx(1.0, abs=1e-3)

    def test_deriv_ignores_affine_difference(self, fitted):
        rng = np.random.default_rng(1)
        base = rng.normal(size=GRID.p)
        chi1 = curve(base)
        chi2 = curve(base + 2.0 + 3.0 * GRID.points)
        assert distance(fitted["deriv"], chi1, chi2) < 1e-6

    def test_grid_mismatch(self, fitted):
        other = Grid(7)
        with pytest.raises(DimensionError):
            distance(fitted["pca"], Curve(other, np.zeros(7)), Curve(other, np.ones(7)))

    def test_distances_to_matches_loop(self, fitted, sample):
        chi = sample.curves[3]
        for s in fitted.values():
            batch = distances_to(s, chi, sample.matrix)
            single = [distance(s, chi, c) for c in sample.curves]
            assert np.allclose(batch, single, atol=1e-12)


class TestSemiNormAxioms:
    @pytest.mark.parametrize("kind", ["pca", "fou", "deriv", "pls"])
    def test_axioms_on_random_triples(self, kind, fitted):
        s = fitted[kind]
        rng = np.random.default_rng(42)
        pool = rng.normal(size=(30, GRID.p)).cumsum(axis=1) * 0.1
        for _ in range(300):
            i, j, k = rng.integers(0, 30, size=3)
            a, b, c = curve(pool[i]), curve(pool[j]), curve(pool[k])
            dab, dbc, dac = distance(s, a, b), distance(s, b, c), distance(s, a, c)
            assert dab >= 0
            assert dab == pytest.approx(distance(s, b, a), abs=1e-12)
            assert dac <= dab + dbc + 1e-10
            shift = curve(rng.normal(size=GRID.p))
            shifted = distance(
                s, curve(a.values + shift.values), curve(b.values + shift.values)
            )
            assert shifted == pytest.approx(dab, abs=1e-10)

    def test_pca_sign_flip_invariance(self, sample):
        s = fit_seminorm(SemiNormSpec("pca", 3), sample)
        flipped = FittedSemiNorm(s.spec, s.grid, -s.operator, -s.basis, s.eigenvalues)
        rng = np.random.default_rng(2)
        a = curve(rng.normal(size=GRID.p))
        b = curve(rng.normal(size=GRID.p))
        assert distance(s, a, b) == pytest.approx(distance(flipped, a, b), rel=1e-12)

    def test_full_rank_pca_reproduces_l2_on_span(self):
        data = brownian_dataset(12, 9)
        s = fit_seminorm(SemiNormSpec("pca", 12), data)
        rng = np.random.default_rng(4)
        for _ in range(10):
            coeffs = rng.normal(size=(2, 12))
            a = curve(coeffs[0] @ data.matrix)
            b = curve(coeffs[1] @ data.matrix)
            diff = curve(a.values - b.values)
            l2 = np.sqrt(inner_product(diff, diff))
            assert distance(s, a, b) == pytest.approx(l2, abs=1e-8 * max(1.0, l2))


class TestFourierSystem:
    def test_interleaving_and_orthonormality(self):
        rows = fourier_system(GRID, 5)
        assert np.allclose(rows[0], 1.0)
        assert np.allclose(rows[1], np.sqrt(2) * np.cos(2 * np.pi * GRID.points))
        assert np.allclose(rows[2], np.sqrt(2) * np.sin(2 * np.pi * GRID.points))
        assert np.allclose(rows[3], np.sqrt(2) * np.cos(4 * np.pi * GRID.points))
        w = GRID.weights
        gram = rows @ (w[:, None] * rows.T)
        assert np.abs(gram - np.eye(5)).max() < 1e-10


class TestSerialization:
    @pytest.mark.parametrize("kind", ["pca", "fou", "deriv", "pls"])
    def test_round_trip(self, kind, fitted, sample, tmp_path):
        s = fitted[kind]
        path = tmp_path / f"{kind}.json"
        save_seminorm(s, path)
        back = load_seminorm(path)
        rng = np.random.default_rng(6)
        a = curve(rng.normal(size=GRID.p))
        b = curve(rng.normal(size=GRID.p))
        assert distance(back, a, b) == pytest.approx(distance(s, a, b), rel=1e-15, abs=1e-15)

    def test_blob_round_trip_preserves_fields(self, fitted):
        blob = seminorm_to_blob(fitted["pca"])
        back = seminorm_from_blob(blob)
        assert back.spec == fitted["pca"].spec
        assert np.array_equal(back.operator, fitted["pca"].operator)


class TestFitSemiNorm:
    def test_empty_dataset(self):
        with pytest.raises(DimensionError):
            fit_seminorm(SemiNormSpec("fou", 2), Dataset(()))

    def test_pls_without_responses(self):
        with pytest.raises(MissingResponseError):
            fit_seminorm(SemiNormSpec("pls", 2), brownian_dataset(8, 1))

    def test_deterministic_distances(self, sample):
        s1 = fit_seminorm(SemiNormSpec("pca", 3), sample)
        s2 = fit_seminorm(SemiNormSpec("pca", 3), sample)
        rng = np.random.default_rng(7)
        a = curve(rng.normal(size=GRID.p))
        b = curve(rng.normal(size=GRID.p))
        assert distance(s1, a, b) == distance(s2, a, b)
