import numpy as np
import pytest

from funflow.experiments import (
    Cell,
    EstimatorSettings,
    ExperimentConfig,
    coverage_study,
    estimate_small_ball_exponent,
    mspe_study,
    rate_check,
    resolve_jobs,
    timing_benchmark,
)

SMALL = ExperimentConfig(n=40, p=25, noise_sd=0.1, replications=20, seed=7)
ONEDIM = ExperimentConfig(
    n=60,
    p=11,
    noise_sd=0.1,
    replications=20,
    seed=3,
    design="onedim",
    settings=EstimatorSettings(C=1.0, nu=0.4, seminorm="fou", seminorm_count=1),
)


class TestConfig:
    def test_unknown_design_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(design="sinusoid")

    def test_jobs_capped_by_env(self, monkeypatch):
        monkeypatch.setenv("FUNFLOW_THREADS", "2")
        assert resolve_jobs(8) == 2
        monkeypatch.delenv("FUNFLOW_THREADS")
        assert resolve_jobs(1) == 1


class TestMspeStudy:
    def test_bit_reproducible(self):
        cells = [Cell("a"), Cell("b", n=25)]
        r1 = mspe_study(SMALL, cells)
        r2 = mspe_study(SMALL, cells)
        assert np.array_equal(r1.records, r2.records, equal_nan=True)

    def test_parallel_matches_serial(self):
        from dataclasses import replace

        cells = [Cell("base")]
        serial = mspe_study(SMALL, cells)
        parallel = mspe_study(replace(SMALL, n_jobs=2), cells)
        assert np.array_equal(serial.records, parallel.records, equal_nan=True)

    def test_summary_matches_records(self):
        report = mspe_study(SMALL, [Cell("x"), Cell("y", n=20)])
        for j, cell in enumerate(report.cells):
            col = report.records[:, j]
            ok = np.isfinite(col)
            assert cell.mean == pytest.approx(col[ok].mean())
            assert cell.sd == pytest.approx(col[ok].std(ddof=1))
            assert cell.count == ok.sum()
            assert cell.excluded == (~ok).sum()

    def test_cells_share_replication_data(self):
        # identical settings in two cells -> identical records
        report = mspe_study(SMALL, [Cell("one"), Cell("two")])
        assert np.array_equal(report.records[:, 0], report.records[:, 1])

    def test_zero_noise_pipeline(self):
        cfg = ExperimentConfig(n=30, p=15, noise_sd=0.0, replications=10, seed=1)
        report = mspe_study(cfg, [Cell("clean")])
        assert np.all(np.isfinite(report.records))
        assert report.cells[0].mean > 0  # pure estimation error remains

    def test_cv_selection_inside_study(self):
        from dataclasses import replace

        cfg = replace(
            SMALL,
            replications=5,
            settings=EstimatorSettings(use_cv=True),
        )
        report = mspe_study(cfg, [Cell("cv-adaptive")])
        assert np.all(np.isfinite(report.records))
        # adaptive bandwidths differ from the fixed default on the same data
        fixed = mspe_study(replace(SMALL, replications=5), [Cell("fixed")])
        assert not np.array_equal(report.records, fixed.records)

    def test_csv_round_trip(self, tmp_path):
        report = mspe_study(SMALL, [Cell("base")])
        report.to_csv(tmp_path / "summary.csv")
        report.records_to_csv(tmp_path / "records.csv")
        report.series_to_csv(tmp_path / "series.csv")
        body = (tmp_path / "summary.csv").read_text().splitlines()
        assert any(line.startswith("# seed=7") for line in body)
        assert body[-1].startswith("base,")
        records = (tmp_path / "records.csv").read_text().splitlines()
        assert len(records) == len([l for l in records if l.startswith("#")]) + 1 + 20


class TestCoverageStudy:
    def test_requires_l_zero(self):
        cfg = ExperimentConfig(settings=EstimatorSettings(l=0.5), replications=2)
        with pytest.raises(ValueError):
            coverage_study(cfg, 0.05)

    def test_degenerate_replications_excluded_and_counted(self):
        # bandwidths so small that each neighborhood holds at most one point:
        # the variance estimate degenerates and the replication is excluded
        cfg = ExperimentConfig(
            n=25,
            p=11,
            noise_sd=0.1,
            replications=8,
            seed=2,
            design="onedim",
            settings=EstimatorSettings(C=0.01, nu=0.4, seminorm="fou", seminorm_count=1),
        )
        report = coverage_study(cfg, 0.05)
        assert report.excluded == 8
        assert report.included == 0
        assert np.isnan(report.coverage)

    def test_counts_and_rate_consistent(self):
        report = coverage_study(ONEDIM, 0.05)
        assert report.included + report.excluded == ONEDIM.replications
        if report.included:
            assert report.coverage == pytest.approx(report.covered / report.included)
        assert report.pivots.size == report.included

    def test_reproducible(self):
        a = coverage_study(ONEDIM, 0.05)
        b = coverage_study(ONEDIM, 0.05)
        assert np.array_equal(a.records, b.records, equal_nan=True)


class TestRateCheck:
    def test_needs_three_sizes(self):
        with pytest.raises(ValueError):
            rate_check([50, 100], SMALL)

    def test_mse_and_slope_finite(self):
        report = rate_check([20, 40, 80], ONEDIM)
        assert report.mse.shape == (3,)
        assert np.all(np.isfinite(report.mse))
        assert np.isfinite(report.slope)
        assert np.isfinite(report.kappa_hat)

    def test_known_exponent_recovered(self):
        rng = np.random.default_rng(0)
        # F(t) = t on [0, 1]: distances uniform, exponent 1
        d = rng.uniform(0, 1, size=20000)
        assert estimate_small_ball_exponent(d) == pytest.approx(1.0, abs=0.05)
        # F(t) = t^2: distances are sqrt(uniform)
        assert estimate_small_ball_exponent(np.sqrt(d)) == pytest.approx(2.0, abs=0.1)


class TestTimingBenchmark:
    def test_single_arrival_smoke(self):
        cfg = ExperimentConfig(n=20, p=15, noise_sd=0.1, seed=4, replications=1)
        report = timing_benchmark(20, [1], cfg)
        assert report.arrivals.tolist() == [1]
        assert report.cumulative_recursive[0] > 0
        assert report.cumulative_batch[0] > 0

    def test_cumulative_series_monotone(self):
        cfg = ExperimentConfig(n=30, p=15, noise_sd=0.1, seed=4, replications=1)
        report = timing_benchmark(30, [5, 20], cfg)
        assert np.all(np.diff(report.cumulative_recursive) >= 0)
        assert np.all(np.diff(report.cumulative_batch) >= 0)
        assert report.ratio(20) == report.cumulative_batch[19] / report.cumulative_recursive[19]

    def test_batch_growth_exponent_with_small_start(self):
        # asymptotic regime (n0 << N, fixed-basis seminorm so the refit has
        # no large constant): per-arrival O(n) work makes the cumulative
        # refit cost grow superlinearly in N
        cfg = ExperimentConfig(
            n=5,
            p=150,
            noise_sd=0.1,
            seed=4,
            replications=1,
            settings=EstimatorSettings(seminorm="fou", seminorm_count=8),
        )
        report = timing_benchmark(5, [400, 800, 1600, 3000], cfg)
        recursive_slope, batch_slope = report.growth_exponents()
        assert batch_slope >= 1.6
        assert 0.8 <= recursive_slope <= 1.3

    def test_csv_export(self, tmp_path):
        cfg = ExperimentConfig(n=15, p=10, noise_sd=0.1, seed=4, replications=1)
        report = timing_benchmark(15, [3], cfg)
        report.to_csv(tmp_path / "times.csv")
        lines = [
            l for l in (tmp_path / "times.csv").read_text().splitlines()
            if not l.startswith("#")
        ]
        assert lines[0] == "arrival,cumulative_recursive,cumulative_batch"
        assert len(lines) == 4
