"""Monte Carlo estimators for overlap and fidelity from amplitude ratios.

The building block is the sample mean of the amplitude ratio
``numerator(s) / denominator(s)`` over configurations drawn from the
denominator's Born distribution.  With both states normalized this mean
estimates the overlap directly (single sided).  In general, the product
of the two opposite-direction means estimates the fidelity: the unknown
normalization factors cancel.

Ratios are formed as exponentials of log-amplitude differences.  The
real part of the difference is clamped at +700 before exponentiation
(ratios are potentially unbounded); how often the clamp fired is
reported rather than hidden.  A vanishing numerator amplitude gives a
ratio of exactly 0.  A sample whose denominator amplitude vanishes has
probability zero under the claimed sampling distribution, so it raises:
it signals a sampler or ansatz bug, not a statistical fluke.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ansatz import NeuralQuantumState
from .bounds import split_sample_budget as split_sample_budget  # re-export
from .sampling import SampleBatch

#: Clamp on the real part of a log-amplitude difference.
RATIO_LOG_CLAMP = 700.0


class ImpossibleSampleError(RuntimeError):
    """A drawn configuration has zero amplitude under the state it was
    supposedly sampled from."""


class RatioSamples(NamedTuple):
    values: np.ndarray
    overflow_count: int


@dataclass(frozen=True)
class EstimateReport:
    """One overlap/fidelity estimate and its ingredients.

    ``ratio_mean_phi`` is the mean ratio psi/phi over samples from phi;
    ``ratio_mean_psi`` is the reverse-direction mean (None in normalized
    single-sided mode, where ``n_psi == 0``).  ``imag_residual`` is the
    imaginary part of the ratio-mean product; the fidelity estimate is
    the real part, so the residual is a free convergence diagnostic.
    """

    ratio_mean_phi: complex
    ratio_mean_psi: complex | None
    n_phi: int
    n_psi: int
    fidelity_estimate: float
    overlap_estimate: complex
    imag_residual: float
    phase_defined: bool
    overflow_count: int


def amplitude_ratios(
    numerator: NeuralQuantumState,
    denominator: NeuralQuantumState,
    batch: SampleBatch,
    *,
    denominator_log_amplitudes: np.ndarray | None = None,
) -> RatioSamples:
    """Ratios ``numerator(s)/denominator(s)`` at the batch configurations.

    When the batch carries its generating state's log amplitudes (exact
    sampler output) they are used for the denominator instead of a fresh
    evaluation; pass ``denominator_log_amplitudes`` to override.
    """
    configs = batch.configurations
    log_num = numerator.log_amplitude_batch(configs)
    if denominator_log_amplitudes is not None:
        log_den = np.asarray(denominator_log_amplitudes)
        if log_den.shape != (batch.n_samples,):
            raise ValueError("denominator amplitude table does not match the batch")
    elif batch.log_amplitudes is not None:
        log_den = batch.log_amplitudes
    else:
        log_den = denominator.log_amplitude_batch(configs)

    if np.any(np.isneginf(log_den.real)):
        raise ImpossibleSampleError(
            "sampled configuration with zero amplitude under the sampling state"
        )
    diff = log_num - log_den
    vanished = np.isneginf(diff.real)
    overflow = int(np.count_nonzero(diff.real > RATIO_LOG_CLAMP))
    values = np.exp(np.minimum(diff.real, RATIO_LOG_CLAMP) + 1j * diff.imag)
    if np.any(vanished):
        values = values.copy()
        values[vanished] = 0.0
    return RatioSamples(values, overflow)


def mean_amplitude_ratio(
    numerator: NeuralQuantumState,
    denominator: NeuralQuantumState,
    batch: SampleBatch,
    *,
    denominator_log_amplitudes: np.ndarray | None = None,
) -> complex:
    """Sample mean of the amplitude ratio over the batch.

    The mean is taken in fixed batch order with numpy's pairwise
    summation, so the result is reproducible however the batch was
    assembled.
    """
    values, _ = amplitude_ratios(
        numerator, denominator, batch, denominator_log_amplitudes=denominator_log_amplitudes
    )
    return complex(values.mean())


class FidelityEstimate(NamedTuple):
    value: float
    imag_residual: float


def fidelity_from_means(mean_phi_side: complex, mean_psi_side: complex) -> FidelityEstimate:
    """Fidelity estimate ``Re(product)`` of the two ratio means, plus the
    imaginary residual of the product as a convergence diagnostic."""
    product = complex(mean_phi_side) * complex(mean_psi_side)
    return FidelityEstimate(product.real, product.imag)


def overlap_from_means(mean_phi_side: complex, mean_psi_side: complex) -> complex:
    """Overlap estimate: magnitude ``sqrt(|product|)`` and the phase of
    the phi-side mean (the symmetric phase combination would only be
    defined modulo pi).  The phase of 0 is taken as 0; callers can check
    ``mean_phi_side != 0`` for definedness."""
    product = complex(mean_phi_side) * complex(mean_psi_side)
    magnitude = np.sqrt(abs(product))
    return complex(magnitude * np.exp(1j * np.angle(mean_phi_side)))


def estimate_normalized(
    psi: NeuralQuantumState, phi: NeuralQuantumState, batch_from_phi: SampleBatch
) -> EstimateReport:
    """Single-sided estimate for normalized states: the ratio mean over
    samples from phi is itself the overlap estimate."""
    if not (psi.is_normalized and phi.is_normalized):
        raise ValueError("single-sided estimation requires normalized states")
    values, overflow = amplitude_ratios(psi, phi, batch_from_phi)
    mean = complex(values.mean())
    return EstimateReport(
        ratio_mean_phi=mean,
        ratio_mean_psi=None,
        n_phi=batch_from_phi.n_samples,
        n_psi=0,
        fidelity_estimate=abs(mean) ** 2,
        overlap_estimate=mean,
        imag_residual=0.0,
        phase_defined=mean != 0,
        overflow_count=overflow,
    )


def estimate_two_sided(
    psi: NeuralQuantumState,
    phi: NeuralQuantumState,
    batch_from_phi: SampleBatch,
    batch_from_psi: SampleBatch,
) -> EstimateReport:
    """General two-sided estimate; works for unnormalized states because
    the normalization factors cancel in the ratio-mean product."""
    phi_values, overflow_phi = amplitude_ratios(psi, phi, batch_from_phi)
    psi_values, overflow_psi = amplitude_ratios(phi, psi, batch_from_psi)
    mean_phi_side = complex(phi_values.mean())
    mean_psi_side = complex(psi_values.mean())
    fidelity, residual = fidelity_from_means(mean_phi_side, mean_psi_side)
    return EstimateReport(
        ratio_mean_phi=mean_phi_side,
        ratio_mean_psi=mean_psi_side,
        n_phi=batch_from_phi.n_samples,
        n_psi=batch_from_psi.n_samples,
        fidelity_estimate=fidelity,
        overlap_estimate=overlap_from_means(mean_phi_side, mean_psi_side),
        imag_residual=residual,
        phase_defined=mean_phi_side != 0,
        overflow_count=overflow_phi + overflow_psi,
    )
