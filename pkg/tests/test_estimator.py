"""Ratio estimators: exact identities, invariances, coverage, variance."""

import cmath
import math

import numpy as np
import pytest

from nqs_overlap.ansatz import Arnn, Rbm, ScaledAnsatz, perturb, random_direction
from nqs_overlap.bounds import (
    fidelity_variance,
    overlap_magnitude_interval,
    overlap_radius_normalized,
    phase_halfwidth,
    fidelity_halfwidth,
    split_sample_budget,
)
from nqs_overlap.configs import RandomStream, unpack_batch
from nqs_overlap.estimator import (
    ImpossibleSampleError,
    amplitude_ratios,
    estimate_normalized,
    estimate_two_sided,
    fidelity_from_means,
    mean_amplitude_ratio,
    overlap_from_means,
)
from nqs_overlap.oracle import exact_probabilities, exact_summary
from nqs_overlap.sampling import SampleBatch, sample_exact_autoregressive, sample_metropolis_chains

from conftest import TableState


def make_pair(kind, n_sites, magnitude, seed):
    stream = RandomStream(seed)
    init, direction_stream = stream.split(2)
    psi = Rbm.random(n_sites, init) if kind == "rbm" else Arnn.random(n_sites, init)
    direction = random_direction(psi.parameters.size, direction_stream)
    return psi, perturb(psi, direction, magnitude)


def batch_of(configs):
    return SampleBatch(np.asarray(configs, dtype=np.int8), "exact")


class TestRatioBasics:
    def test_identical_states_give_exactly_one(self, rng):
        rbm = Rbm.random(6, RandomStream(1))
        configs = (2 * rng.integers(0, 2, size=(50, 6)) - 1).astype(np.int8)
        assert mean_amplitude_ratio(rbm, rbm, batch_of(configs)) == 1.0 + 0.0j

    def test_disjoint_support_gives_zero(self):
        up = np.zeros(8, dtype=complex)
        up[[1, 3, 5, 7]] = [1.0, 0.5, 0.25, 0.125]
        down = np.zeros(8, dtype=complex)
        down[[0, 2, 4, 6]] = [0.5, 0.5, 0.5, 0.5]
        psi, phi = TableState(up, normalized=True), TableState(down, normalized=True)
        # samples from phi live where psi vanishes, and vice versa
        phi_batch = batch_of(unpack_batch(np.array([0, 2, 4, 6]), 3))
        psi_batch = batch_of(unpack_batch(np.array([1, 3, 5, 7]), 3))
        assert mean_amplitude_ratio(psi, phi, phi_batch) == 0.0 + 0.0j
        assert mean_amplitude_ratio(phi, psi, psi_batch) == 0.0 + 0.0j

    def test_single_sample_batch_is_the_ratio(self):
        psi, phi = make_pair("rbm", 5, 1.0, 3)
        config = unpack_batch(np.array([7]), 5)
        expected = cmath.exp(
            complex(psi.log_amplitude(config[0]) - phi.log_amplitude(config[0]))
        )
        got = mean_amplitude_ratio(psi, phi, batch_of(config))
        assert got == pytest.approx(expected, rel=1e-12)

    def test_permutation_invariance(self, rng):
        psi, phi = make_pair("rbm", 8, 1.5, 4)
        configs = (2 * rng.integers(0, 2, size=(4000, 8)) - 1).astype(np.int8)
        forward = mean_amplitude_ratio(psi, phi, batch_of(configs))
        shuffled = configs[rng.permutation(4000)]
        backward = mean_amplitude_ratio(psi, phi, batch_of(shuffled))
        assert backward == pytest.approx(forward, rel=1e-12)

    def test_zero_denominator_raises(self):
        holes = np.ones(8, dtype=complex)
        holes[3] = 0.0
        state = TableState(holes)
        other = TableState(np.ones(8, dtype=complex))
        bad_batch = batch_of(unpack_batch(np.array([3]), 3))
        with pytest.raises(ImpossibleSampleError):
            mean_amplitude_ratio(other, state, bad_batch)

    def test_zero_numerator_contributes_zero(self):
        holes = np.ones(8, dtype=complex)
        holes[5] = 0.0
        psi = TableState(holes)
        phi = TableState(np.full(8, 2.0, dtype=complex))
        batch = batch_of(unpack_batch(np.array([5, 0]), 3))
        values, overflow = amplitude_ratios(psi, phi, batch)
        assert values[0] == 0.0 + 0.0j
        assert values[1] == pytest.approx(0.5)
        assert overflow == 0

    def test_overflow_clamped_and_counted(self):
        rbm = Rbm.random(4, RandomStream(2))
        blown = ScaledAnsatz(rbm, 800.0)
        batch = batch_of(unpack_batch(np.arange(4), 4))
        values, overflow = amplitude_ratios(blown, rbm, batch)
        assert overflow == 4
        assert np.all(np.isfinite(values.real))

    def test_batch_amplitudes_used_when_present(self):
        psi, phi = make_pair("arnn", 6, 0.05, 5)
        batch = sample_exact_autoregressive(phi, 500, RandomStream(6))
        with_amps = mean_amplitude_ratio(psi, phi, batch)
        stripped = SampleBatch(batch.configurations.copy(), "exact")
        recomputed = mean_amplitude_ratio(psi, phi, stripped)
        assert with_amps == pytest.approx(recomputed, rel=1e-9)


class TestAssembly:
    def test_fidelity_from_means_arithmetic(self):
        estimate = fidelity_from_means(0.6 + 0.2j, 0.6 - 0.2j)
        assert estimate.value == pytest.approx(0.40)
        assert estimate.imag_residual == pytest.approx(0.0)

    def test_unit_means(self):
        assert fidelity_from_means(1.0, 1.0).value == 1.0
        assert overlap_from_means(1.0, 1.0) == 1.0 + 0.0j

    def test_overlap_magnitude_and_phase(self):
        overlap = overlap_from_means(0.5j, -0.5j)
        assert abs(overlap) == pytest.approx(0.5)
        assert cmath.phase(overlap) == pytest.approx(math.pi / 2)

    def test_overlap_of_zero_mean(self):
        assert overlap_from_means(0.0, 0.0) == 0.0 + 0.0j

    def test_normalized_report_fields(self):
        psi, phi = make_pair("arnn", 6, 0.02, 7)
        batch = sample_exact_autoregressive(phi, 256, RandomStream(8))
        report = estimate_normalized(psi, phi, batch)
        assert report.n_phi == 256
        assert report.n_psi == 0
        assert report.ratio_mean_psi is None
        assert report.overlap_estimate == report.ratio_mean_phi
        assert report.fidelity_estimate == pytest.approx(abs(report.ratio_mean_phi) ** 2)
        assert report.phase_defined

    def test_normalized_rejects_unnormalized(self):
        rbm = Rbm.random(4, RandomStream(1))
        batch = batch_of(unpack_batch(np.arange(4), 4))
        with pytest.raises(ValueError):
            estimate_normalized(rbm, rbm, batch)

    def test_two_sided_report_fields(self):
        psi, phi = make_pair("rbm", 6, 1.0, 9)
        batch_phi = sample_metropolis_chains(phi, 128, 1, RandomStream(10))[0]
        batch_psi = sample_metropolis_chains(psi, 128, 1, RandomStream(11))[0]
        report = estimate_two_sided(psi, phi, batch_phi, batch_psi)
        product = report.ratio_mean_phi * report.ratio_mean_psi
        assert report.fidelity_estimate == pytest.approx(product.real)
        assert report.imag_residual == pytest.approx(product.imag)
        assert abs(report.overlap_estimate) == pytest.approx(math.sqrt(abs(product)))
        assert report.n_phi == report.n_psi == 128


class TestExactMeanIdentities:
    def test_reverse_mean_is_conjugate_for_normalized(self):
        # full-basis expectations of the two ratio directions at L = 8
        psi, phi = make_pair("arnn", 8, 0.01, 13)
        basis = unpack_batch(np.arange(1 << 8), 8)
        p_phi = exact_probabilities(phi)
        p_psi = exact_probabilities(psi)
        ratios_fwd, _ = amplitude_ratios(psi, phi, batch_of(basis))
        ratios_rev, _ = amplitude_ratios(phi, psi, batch_of(basis))
        mean_fwd = (p_phi * ratios_fwd).sum()
        mean_rev = (p_psi * ratios_rev).sum()
        assert mean_rev == pytest.approx(np.conj(mean_fwd), abs=1e-10)
        # and both reproduce the oracle overlap
        summary = exact_summary(psi, phi)
        assert mean_fwd == pytest.approx(summary.overlap, abs=1e-10)

    def test_weighted_moments_match_oracle(self):
        psi, phi = make_pair("rbm", 8, 1.5, 14)
        summary = exact_summary(psi, phi)
        basis = unpack_batch(np.arange(1 << 8), 8)
        p_phi = exact_probabilities(phi)
        ratios, _ = amplitude_ratios(psi, phi, batch_of(basis))
        mean_z = (p_phi * ratios).sum()
        var_z = (p_phi * np.abs(ratios) ** 2).sum() - abs(mean_z) ** 2
        assert mean_z == pytest.approx(summary.mean_z, rel=1e-10)
        assert var_z == pytest.approx(summary.norm_ratio * (1 - summary.fidelity), rel=1e-8)


class TestScaleInvariance:
    def test_product_invariant_under_rescaling(self, rng):
        # the testable form of "normalization factors cancel out"
        psi, phi = make_pair("rbm", 8, 1.5, 15)
        configs_phi = (2 * rng.integers(0, 2, size=(2048, 8)) - 1).astype(np.int8)
        configs_psi = (2 * rng.integers(0, 2, size=(2048, 8)) - 1).astype(np.int8)
        batch_phi, batch_psi = batch_of(configs_phi), batch_of(configs_psi)

        base = estimate_two_sided(psi, phi, batch_phi, batch_psi)
        for offset in (1.3 - 0.7j, -2.0 + 3.1j):
            scaled_psi = ScaledAnsatz(psi, offset)
            scaled = estimate_two_sided(scaled_psi, phi, batch_phi, batch_psi)
            factor = cmath.exp(offset)
            assert scaled.ratio_mean_phi == pytest.approx(base.ratio_mean_phi * factor, rel=1e-12)
            assert scaled.ratio_mean_psi == pytest.approx(base.ratio_mean_psi / factor, rel=1e-12)
            assert scaled.fidelity_estimate == pytest.approx(base.fidelity_estimate, rel=1e-12)
            # rescaling phi instead also cancels
            scaled_phi = estimate_two_sided(psi, ScaledAnsatz(phi, offset), batch_phi, batch_psi)
            assert scaled_phi.fidelity_estimate == pytest.approx(
                base.fidelity_estimate, rel=1e-12
            )


class TestStatisticalBehavior:
    def test_normalized_overlap_coverage(self):
        # |mean - overlap| < radius in at least 68 of 100 repetitions
        psi, phi = make_pair("arnn", 10, 1e-4, 16)
        summary = exact_summary(psi, phi)
        n_samples, delta = 65536, 0.32
        radius = overlap_radius_normalized(min(summary.fidelity, 1.0), n_samples, delta)
        streams = RandomStream(17).split(100)
        hits = 0
        for stream in streams:
            batch = sample_exact_autoregressive(phi, n_samples, stream)
            report = estimate_normalized(psi, phi, batch)
            hits += abs(report.ratio_mean_phi - summary.overlap) < radius
        assert hits >= 68

    def test_two_sided_variance_matches_prediction(self):
        # 100 repetitions at n = 65536: variance of the fidelity estimate
        # against the exact prediction built from the oracle's ratio
        # moments, and the complex product variance against the closed form
        psi, phi = make_pair("arnn", 12, 3e-4, 18)
        summary = exact_summary(psi, phi)
        fidelity = min(summary.fidelity, 1.0)
        n_phi, n_psi = split_sample_budget(65536)
        reps = 100
        fids = np.empty(reps)
        products = np.empty(reps, dtype=complex)
        for r, stream in enumerate(RandomStream(19).split(reps)):
            phi_stream, psi_stream = stream.split(2)
            batch_phi = sample_exact_autoregressive(phi, n_phi, phi_stream)
            batch_psi = sample_exact_autoregressive(psi, n_psi, psi_stream)
            report = estimate_two_sided(psi, phi, batch_phi, batch_psi)
            fids[r] = report.fidelity_estimate
            products[r] = report.ratio_mean_phi * report.ratio_mean_psi

        closed_form = fidelity_variance(fidelity, n_phi, n_psi)
        pv_z = summary.pseudo_var_z_normalized
        pv_w = summary.pseudo_var_w_normalized
        ov = summary.overlap
        pseudo = ov**2 * pv_w / n_psi + np.conj(ov) ** 2 * pv_z / n_phi + pv_z * pv_w / (
            n_phi * n_psi
        )
        predicted_re = 0.5 * (closed_form + pseudo.real)

        squared = (fids - fids.mean()) ** 2
        emp_re = squared.sum() / (reps - 1)
        se_re = squared.std(ddof=1) / math.sqrt(reps)
        assert abs(emp_re - predicted_re) < 5.0 * se_re

        centered = np.abs(products - products.mean()) ** 2
        emp_cx = centered.sum() / (reps - 1)
        se_cx = centered.std(ddof=1) / math.sqrt(reps)
        assert abs(emp_cx - closed_form) < 5.0 * se_cx

        # the mean of the estimates converges to the exact fidelity
        mean_se = math.sqrt(closed_form / reps)
        assert abs(fids.mean() - fidelity) < 5.0 * mean_se

    def test_two_sided_overlap_in_confidence_region(self):
        # overlap estimates fall in the magnitude-interval x phase-cone
        # region around the exact overlap in at least 68 of 100 runs
        psi, phi = make_pair("rbm", 10, 1.8, 20)
        summary = exact_summary(psi, phi)
        fidelity = min(summary.fidelity, 1.0)
        n_samples, delta = 4096, 0.32
        n_phi, n_psi = split_sample_budget(n_samples)
        halfwidth = fidelity_halfwidth(fidelity, n_samples, delta)
        lo, hi = overlap_magnitude_interval(fidelity, halfwidth)
        cone = phase_halfwidth(fidelity, n_samples, delta)
        exact_phase = cmath.phase(summary.overlap)
        hits = 0
        for stream in RandomStream(23).split(100):
            phi_stream, psi_stream = stream.split(2)
            batch_phi = sample_metropolis_chains(phi, n_phi, 1, phi_stream)[0]
            batch_psi = sample_metropolis_chains(psi, n_psi, 1, psi_stream)[0]
            report = estimate_two_sided(psi, phi, batch_phi, batch_psi)
            magnitude = abs(report.overlap_estimate)
            phase_gap = abs(
                cmath.phase(cmath.exp(1j * (cmath.phase(report.overlap_estimate) - exact_phase)))
            )
            hits += (lo <= magnitude <= hi) and (phase_gap <= cone)
        assert hits >= 68
