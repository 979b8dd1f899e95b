import numpy as np
import pytest

from funflow.curves import (
    Curve,
    Dataset,
    Grid,
    inner_product,
    load_dataset,
    save_dataset,
    simulate_brownian,
    simulate_regression_sample,
    target_operator,
)
from funflow.errors import DimensionError, FormatError, ParseError


def curve(grid, values):
    return Curve(grid, np.asarray(values, dtype=float))


class TestGrid:
    def test_points_are_uniform_with_endpoints(self):
        g = Grid(5)
        assert g.points[0] == 0.0 and g.points[-1] == 1.0
        assert np.allclose(np.diff(g.points), 0.25)

    def test_needs_two_points(self):
        with pytest.raises(DimensionError):
            Grid(1)

    def test_weights_sum_to_one(self):
        for p in (2, 3, 10, 101):
            assert Grid(p).weights.sum() == pytest.approx(1.0, abs=1e-14)

    def test_rejects_nonuniform_points(self):
        with pytest.raises(FormatError):
            Grid(3, np.array([0.0, 0.7, 1.0]))


class TestCurveDataset:
    def test_curve_length_checked(self):
        with pytest.raises(DimensionError):
            Curve(Grid(3), np.array([1.0, 2.0]))

    def test_curve_rejects_nonfinite(self):
        with pytest.raises(ParseError):
            Curve(Grid(3), np.array([1.0, np.nan, 2.0]))

    def test_dataset_requires_shared_grid(self):
        with pytest.raises(DimensionError):
            Dataset((curve(Grid(3), [1, 2, 3]), curve(Grid(4), [1, 2, 3, 4])))

    def test_dataset_response_length(self):
        with pytest.raises(DimensionError):
            Dataset((curve(Grid(3), [1, 2, 3]),), np.array([1.0, 2.0]))

    def test_matrix_stacks_rows(self):
        g = Grid(3)
        data = Dataset((curve(g, [1, 1, 1]), curve(g, [0, 1, 2])))
        assert np.array_equal(data.matrix, [[1, 1, 1], [0, 1, 2]])


class TestLoadDataset:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "curves.csv"
        path.write_text("1,1,1\n0,1,2\n")
        data = load_dataset(path)
        assert len(data) == 2
        assert data.grid.p == 3
        assert np.array_equal(data.matrix, [[1, 1, 1], [0, 1, 2]])

    def test_round_trip_with_responses(self, tmp_path):
        (tmp_path / "c.csv").write_text("1,1,1\n0,1,2\n")
        (tmp_path / "y.csv").write_text("5\n7\n")
        data = load_dataset(tmp_path / "c.csv", tmp_path / "y.csv")
        assert np.array_equal(data.responses, [5.0, 7.0])

    def test_ragged_row_is_format_error(self, tmp_path):
        (tmp_path / "c.csv").write_text("1,1,1\n0,1,2,3\n")
        with pytest.raises(FormatError, match="ragged"):
            load_dataset(tmp_path / "c.csv")

    def test_non_numeric_cell_reports_position(self, tmp_path):
        (tmp_path / "c.csv").write_text("1,1,1\n0,oops,2\n")
        with pytest.raises(ParseError, match="row 2, column 2"):
            load_dataset(tmp_path / "c.csv")

    def test_response_length_mismatch(self, tmp_path):
        (tmp_path / "c.csv").write_text("1,1,1\n0,1,2\n")
        (tmp_path / "y.csv").write_text("5\n")
        with pytest.raises(DimensionError):
            load_dataset(tmp_path / "c.csv", tmp_path / "y.csv")

    def test_grid_header_accepted(self, tmp_path):
        (tmp_path / "c.csv").write_text("# grid: 0,0.5,1\n1,1,1\n")
        data = load_dataset(tmp_path / "c.csv")
        assert data.grid.p == 3

    def test_save_load_is_identity(self, tmp_path):
        data = simulate_regression_sample(4, 6, 0.1, 3)
        save_dataset(data, tmp_path / "c.csv", tmp_path / "y.csv")
        back = load_dataset(tmp_path / "c.csv", tmp_path / "y.csv")
        assert np.array_equal(back.matrix, data.matrix)
        assert np.array_equal(back.responses, data.responses)


class TestInnerProduct:
    def test_constants_exact(self):
        for p in (2, 7, 100):
            g = Grid(p)
            one = curve(g, np.ones(p))
            assert inner_product(one, one) == pytest.approx(1.0, abs=1e-14)

    def test_t_squared_integral(self):
        g = Grid(101)
        t = curve(g, g.points)
        assert inner_product(t, t) == pytest.approx(1 / 3, abs=1e-4)

    def test_linear_exact_at_p2(self):
        g = Grid(2)
        assert inner_product(curve(g, [1, 1]), curve(g, [0, 1])) == 0.5

    def test_grid_mismatch(self):
        with pytest.raises(DimensionError):
            inner_product(curve(Grid(3), [1, 2, 3]), curve(Grid(4), [1, 2, 3, 4]))

    def test_symmetric_bilinear_nonneg(self):
        rng = np.random.default_rng(5)
        g = Grid(17)
        for _ in range(50):
            f = curve(g, rng.normal(size=17))
            h = curve(g, rng.normal(size=17))
            a, b = rng.normal(size=2)
            assert inner_product(f, h) == pytest.approx(inner_product(h, f), rel=1e-12)
            lhs = inner_product(curve(g, a * f.values + b * h.values), h)
            rhs = a * inner_product(f, h) + b * inner_product(h, h)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
            assert inner_product(f, f) >= 0


class TestBrownian:
    def test_starts_at_zero_single_increment(self):
        (c,) = simulate_brownian(1, 2, 0)
        assert c.values[0] == 0.0

    def test_deterministic_given_seed(self):
        a = simulate_brownian(3, 50, 11)
        b = simulate_brownian(3, 50, 11)
        for x, y in zip(a, b):
            assert np.array_equal(x.values, y.values)

    def test_terminal_variance(self):
        curves = simulate_brownian(10000, 100, 2024)
        terminal = np.array([c.values[-1] for c in curves])
        assert 0.94 <= terminal.var(ddof=1) <= 1.06

    def test_increment_variance_scaling(self):
        curves = simulate_brownian(4000, 10, 7)
        increments = np.diff(np.stack([c.values for c in curves]), axis=1)
        assert increments.var(ddof=1) == pytest.approx(1 / 9, rel=0.1)


class TestTargetOperator:
    def test_constant_curve(self):
        g = Grid(9)
        assert target_operator(curve(g, np.full(9, 3.0))) == pytest.approx(9.0, rel=1e-12)

    def test_linear_curve(self):
        g = Grid(101)
        assert target_operator(curve(g, g.points)) == pytest.approx(1 / 3, abs=1e-4)

    def test_zero_curve(self):
        assert target_operator(curve(Grid(5), np.zeros(5))) == 0.0

    def test_quadratic_scaling(self):
        rng = np.random.default_rng(8)
        g = Grid(30)
        chi = curve(g, rng.normal(size=30))
        for c in (0.5, 2.0, -3.0):
            assert target_operator(curve(g, c * chi.values)) == pytest.approx(
                c * c * target_operator(chi), rel=1e-12
            )


class TestRegressionSample:
    def test_zero_noise_matches_operator(self):
        data = simulate_regression_sample(20, 30, 0.0, 5)
        for c, y in zip(data.curves, data.responses):
            assert y == pytest.approx(target_operator(c), rel=1e-12)

    def test_noise_mean_small(self):
        data = simulate_regression_sample(5000, 20, 0.1, 99)
        resid = data.responses - np.array([target_operator(c) for c in data.curves])
        assert -0.005 <= resid.mean() <= 0.005

    def test_deterministic(self):
        a = simulate_regression_sample(6, 10, 0.1, 21)
        b = simulate_regression_sample(6, 10, 0.1, 21)
        assert np.array_equal(a.matrix, b.matrix)
        assert np.array_equal(a.responses, b.responses)

    def test_negative_noise_rejected(self):
        with pytest.raises(ParseError):
            simulate_regression_sample(5, 5, -1.0, 0)
