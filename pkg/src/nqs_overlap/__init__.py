"""Monte Carlo overlap and fidelity estimation for neural quantum states.

The package estimates the overlap and fidelity between two neural
quantum states from samples of their Born distributions, evaluates
closed-form error bounds on those estimates, and validates both against
exact full-basis summation at small system sizes.
"""

from .ansatz import (
    Arnn,
    NeuralQuantumState,
    Rbm,
    ScaledAnsatz,
    log_two_cosh,
    perturb,
    random_ansatz,
    random_direction,
    load_ansatz,
    save_ansatz,
)
from .bounds import (
    BoundInputs,
    BoundReport,
    bound_report,
    chebyshev_tighter_than_median,
    fidelity_halfwidth,
    fidelity_halfwidth_normalized,
    fidelity_halfwidth_taylor,
    fidelity_variance,
    median_of_means_halfwidth,
    overlap_magnitude_interval,
    overlap_radius_normalized,
    phase_halfwidth,
    required_samples_normalized,
    split_sample_budget,
)
from .configs import (
    ENUMERATION_MAX_SITES,
    PACK_MAX_SITES,
    RandomStream,
    enumerate_basis,
    flip,
    pack,
    random_configuration,
    unpack,
    unpack_batch,
)
from .estimator import (
    EstimateReport,
    ImpossibleSampleError,
    amplitude_ratios,
    estimate_normalized,
    estimate_two_sided,
    fidelity_from_means,
    mean_amplitude_ratio,
    overlap_from_means,
)
from .oracle import (
    ORACLE_MAX_SITES,
    ExactSummary,
    exact_fidelity,
    exact_log_amplitudes,
    exact_log_norm,
    exact_norm,
    exact_overlap,
    exact_probabilities,
    exact_summary,
    exact_var_ratios,
)
from .sampling import (
    ChainSettings,
    SampleBatch,
    flip_acceptance,
    sample_exact_autoregressive,
    sample_metropolis,
    sample_metropolis_chains,
)

__version__ = "0.1.0"
