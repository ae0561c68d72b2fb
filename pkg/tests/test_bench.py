"""Benchmark harness: pair generation, experiments, binning, emission."""

import json

import numpy as np
import pytest

import nqs_overlap.bench as bench
from nqs_overlap.bench import (
    ExperimentSpec,
    default_interpolation_grid,
    emit,
    fit_loglog_slope,
    generate_state_pair,
    overlap_region_radius,
    pair_at_fidelity,
    run_bound_experiment,
    run_scaling_experiment,
    run_size_experiment,
    run_variance_experiment,
)
from nqs_overlap.bounds import fidelity_halfwidth, overlap_magnitude_interval, phase_halfwidth
from nqs_overlap.configs import RandomStream

SMALL = dict(n_sites=8, n_samples=256, repetitions=8, n_pairs=4, seed=11)


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentSpec(ansatz_kind="mps")
        with pytest.raises(ValueError):
            ExperimentSpec(ansatz_kind="rbm", bin_width=0.03)
        with pytest.raises(ValueError):
            ExperimentSpec(ansatz_kind="rbm", delta=1.2)

    def test_bin_geometry(self):
        spec = ExperimentSpec(ansatz_kind="rbm")
        assert spec.n_bins == 50
        assert spec.n_bins * spec.bin_width == pytest.approx(1.0)
        assert spec.bin_index(0.0) == 0
        assert spec.bin_index(1.0) == 49
        assert spec.bin_center(49) == pytest.approx(0.99)


class TestPairGeneration:
    def test_zero_magnitude_is_identity(self):
        pair = generate_state_pair("rbm", 8, 0.0, 42)
        assert pair.fidelity == pytest.approx(1.0, abs=1e-12)
        assert pair.psi is pair.phi

    def test_same_seed_reproduces_pair(self):
        a = generate_state_pair("arnn", 8, 0.3, 7)
        b = generate_state_pair("arnn", 8, 0.3, 7)
        assert np.array_equal(a.psi.parameters, b.psi.parameters)
        assert np.array_equal(a.phi.parameters, b.phi.parameters)
        assert a.summary.fidelity == b.summary.fidelity

    def test_oracle_ceiling_enforced(self):
        with pytest.raises(ValueError):
            generate_state_pair("rbm", 25, 1.0, 3)

    @pytest.mark.parametrize("kind", ["rbm", "arnn"])
    def test_grid_sweep_covers_fidelity_bins(self, kind):
        # a log-spaced magnitude sweep at L = 10 populates at least 40 of
        # the 50 fidelity bins (the grid ranges are calibrated for this)
        n_points = 150
        grid = default_interpolation_grid(kind, 10, n_points)
        root = RandomStream(20240901)
        bins = set()
        fidelities = []
        for i, pair_stream in enumerate(root.split(n_points)):
            gen_stream, _ = pair_stream.split(2)
            pair = generate_state_pair(kind, 10, float(grid[i]), gen_stream)
            fidelities.append(pair.fidelity)
            bins.add(min(int(pair.fidelity / 0.02), 49))
        fidelities = np.array(fidelities)
        assert len(bins) >= 40
        assert fidelities.min() < 0.01
        assert fidelities.max() > 0.99

    @pytest.mark.parametrize("kind", ["rbm", "arnn"])
    def test_targeted_fidelity_search(self, kind):
        pair = pair_at_fidelity(kind, 8, 0.5, 91, tolerance=0.04)
        assert 0.45 <= pair.fidelity <= 0.55

    def test_targeted_search_rejects_bad_target(self):
        with pytest.raises(ValueError):
            pair_at_fidelity("rbm", 6, 1.5, 3)


class TestVarianceExperiment:
    def test_identical_pair_has_zero_variance(self):
        # magnitude 0 pair: every ratio is exactly 1
        spec = ExperimentSpec(ansatz_kind="arnn", **SMALL)
        pair = generate_state_pair("arnn", 8, 0.0, 5)
        reports = bench._run_repetitions(spec, pair, RandomStream(6))
        means = np.array([r.ratio_mean_phi for r in reports])
        assert np.all(means == 1.0 + 0.0j)
        assert np.abs(means - means.mean()).max() == 0.0

    @pytest.mark.parametrize("kind", ["rbm", "arnn"])
    def test_structure_and_determinism(self, kind):
        spec = ExperimentSpec(ansatz_kind=kind, **SMALL)
        result = run_variance_experiment(spec)
        again = run_variance_experiment(spec)
        assert result.to_json_dict() == again.to_json_dict()
        assert len(result.rows) == spec.n_pairs
        for row in result.rows:
            assert row["n_estimates"] == spec.repetitions
            assert row["empirical_variance"] >= 0.0
            assert row["predicted_variance"] >= 0.0
        assert len(result.pairs) == spec.n_pairs
        for record in result.pairs:
            assert len(record["estimates"]) == spec.repetitions


class TestBoundExperiment:
    @pytest.mark.parametrize("kind", ["rbm", "arnn"])
    def test_binned_structure(self, kind):
        spec = ExperimentSpec(ansatz_kind=kind, **SMALL)
        result = run_bound_experiment(spec)
        total = sum(row["count"] for row in result.rows)
        assert total == spec.n_pairs * spec.repetitions
        for row in result.rows:
            assert 0.0 <= row["coverage_failure_rate"] <= 1.0
            assert row["fidelity_bound_curve"] > 0.0
            assert row["mean_abs_fidelity_error"] >= 0.0
        # per-estimate records carry their oracle fidelity via the pair
        for record in result.pairs:
            assert "fidelity_exact" in record
            assert all("coverage_failed" in e for e in record["estimates"])

    def test_perfect_pair_bin_has_tiny_error(self):
        spec = ExperimentSpec(
            ansatz_kind="arnn", n_sites=8, n_samples=64, repetitions=4, n_pairs=2, seed=3
        )
        pair = generate_state_pair("arnn", 8, 0.0, 9)
        reports = bench._run_repetitions(spec, pair, RandomStream(10))
        for report in reports:
            assert abs(report.fidelity_estimate - 1.0) < 1e-8


class TestScalingExperiment:
    def test_rows_and_slope(self):
        spec = ExperimentSpec(
            ansatz_kind="arnn", n_sites=8, n_samples=256, repetitions=12, n_pairs=2, seed=21
        )
        result = run_scaling_experiment(spec, [64, 256, 1024])
        assert [row["n_samples"] for row in result.rows] == [64, 256, 1024]
        errors = [row["mean_abs_fidelity_error"] for row in result.rows]
        assert errors[0] > errors[-1]
        assert result.extras["slope"] is not None

    def test_single_point_grid_skips_fit(self):
        spec = ExperimentSpec(
            ansatz_kind="arnn", n_sites=8, n_samples=256, repetitions=6, n_pairs=2, seed=21
        )
        result = run_scaling_experiment(spec, [128])
        assert len(result.rows) == 1
        assert result.extras["slope"] is None

    def test_grid_must_ascend(self):
        spec = ExperimentSpec(ansatz_kind="arnn", **SMALL)
        with pytest.raises(ValueError):
            run_scaling_experiment(spec, [256, 128])

    def test_fit_helper(self):
        xs = [10.0, 100.0, 1000.0]
        ys = [1.0, 0.1, 0.01]
        slope, stderr = fit_loglog_slope(xs, ys)
        assert slope == pytest.approx(-1.0, abs=1e-12)
        assert fit_loglog_slope([10.0], [1.0]) == (None, None)


class TestSizeExperiment:
    def test_rows_and_null_comparison(self):
        spec = ExperimentSpec(
            ansatz_kind="arnn", n_sites=8, n_samples=512, repetitions=16, n_pairs=3, seed=31
        )
        result = run_size_experiment(spec, [6, 8])
        assert [row["n_sites"] for row in result.rows] == [6, 8]
        assert result.extras["max_pairwise_z"] >= 0.0
        for row in result.rows:
            assert row["count"] == spec.repetitions * spec.n_pairs

    def test_oracle_ceiling(self):
        spec = ExperimentSpec(ansatz_kind="rbm", **SMALL)
        with pytest.raises(ValueError):
            run_size_experiment(spec, [8, 30])


class TestRegionRadius:
    def test_contains_interval_corners(self):
        fidelity, n, delta = 0.6, 4096, 0.32
        radius = overlap_region_radius(fidelity, n, delta)
        halfwidth = fidelity_halfwidth(fidelity, n, delta)
        lo, hi = overlap_magnitude_interval(fidelity, halfwidth)
        center = np.sqrt(fidelity)
        assert radius >= hi - center
        assert radius >= center - lo
        assert radius <= (hi - center) + center * phase_halfwidth(fidelity, n, delta) + 1e-9

    def test_degenerate_at_perfect_fidelity(self):
        assert overlap_region_radius(1.0, 1024, 0.32) == pytest.approx(0.0, abs=1e-12)


class TestEmission:
    def _small_result(self):
        spec = ExperimentSpec(ansatz_kind="arnn", **SMALL)
        return run_variance_experiment(spec)

    def test_json_roundtrip_exact(self, tmp_path):
        result = self._small_result()
        path = tmp_path / "out.json"
        emit(result, str(path), "json")
        on_disk = json.loads(path.read_text())
        assert on_disk == result.to_json_dict()

    def test_json_byte_identical_across_runs(self, tmp_path):
        result = self._small_result()
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        emit(result, str(a), "json")
        emit(self._small_result(), str(b), "json")
        assert a.read_bytes() == b.read_bytes()

    def test_csv_row_count_and_header(self, tmp_path):
        result = self._small_result()
        path = tmp_path / "out.csv"
        emit(result, str(path), "csv")
        lines = path.read_text().strip().splitlines()
        assert lines[0].split(",") == result.csv_header()
        assert len(lines) - 1 == len(result.rows)

    def test_bound_csv_rows_are_nonempty_bins(self, tmp_path):
        spec = ExperimentSpec(ansatz_kind="rbm", **SMALL)
        result = run_bound_experiment(spec)
        path = tmp_path / "bounds.csv"
        emit(result, str(path), "csv")
        lines = path.read_text().strip().splitlines()
        assert len(lines) - 1 == len(result.rows)
        assert all(row["count"] > 0 for row in result.rows)

    def test_bad_format_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit(self._small_result(), str(tmp_path / "x.bin"), "parquet")

    def test_io_error_carries_path(self, tmp_path):
        result = self._small_result()
        missing = tmp_path / "no" / "such" / "dir" / "f.json"
        with pytest.raises(OSError) as err:
            emit(result, str(missing), "json")
        assert "f.json" in str(err.value)

    def test_spec_echo_includes_seed(self):
        result = self._small_result()
        payload = result.to_json_dict()
        assert payload["spec"]["seed"] == SMALL["seed"]
        assert all("stream_key" in record for record in payload["pairs"])
