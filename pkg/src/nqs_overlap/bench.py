"""Benchmark harness: state pairs, repeated estimation, binning, bounds.

The experiments reproduce the validation protocol at desk scale: build
pairs of states with known exact fidelity across the whole [0, 1] range,
run many independent Monte Carlo estimates per pair, and compare errors,
variances and coverage against the closed-form bounds and the exact
oracle.

Pairs are generated by parameter interpolation: a seeded random base
state is perturbed along a seeded random unit direction by a magnitude
``t``.  ``t = 0`` gives fidelity 1 exactly; large ``t`` decoheres the
pair.  Fidelity-targeted searches walk a ladder of magnitudes and
bisect a bracketing interval (fidelity is continuous in ``t``, so a
crossing always exists inside a bracket even where it is not monotone).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds as bd
from .ansatz import NeuralQuantumState, perturb, random_ansatz, random_direction
from .configs import RandomStream
from .estimator import EstimateReport, estimate_normalized, estimate_two_sided
from .oracle import (
    ORACLE_MAX_SITES,
    ExactSummary,
    exact_log_amplitudes,
    exact_summary,
    fidelity_between_tables,
)
from .sampling import ChainSettings, sample_exact_autoregressive, sample_metropolis_chains

#: Interpolation-magnitude range per ansatz family, calibrated at the
#: reference size L = 12 so that a log-spaced sweep covers fidelities
#: from ~1 down to ~0; rescaled by sqrt(12 / L) for other sizes.
GRID_RANGE = {"rbm": (0.8, 4.8), "arnn": (1e-6, 30.0)}
_REFERENCE_SITES = 12

ANSATZ_KINDS = ("rbm", "arnn")


@dataclass(frozen=True)
class ExperimentSpec:
    """Settings shared by all experiments (desk-scale defaults)."""

    ansatz_kind: str
    n_sites: int = 12
    n_samples: int = 16384
    repetitions: int = 100
    n_pairs: int = 10
    delta: float = 0.32
    seed: int = 20240901
    bin_width: float = 0.02
    burn_in_sweeps: int = 25

    def __post_init__(self):
        if self.ansatz_kind not in ANSATZ_KINDS:
            raise ValueError(f"ansatz_kind must be one of {ANSATZ_KINDS}")
        if self.n_sites < 1:
            raise ValueError("n_sites must be positive")
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        if self.repetitions < 2:
            raise ValueError("repetitions must be at least 2")
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        bins = 1.0 / self.bin_width
        if abs(bins - round(bins)) > 1e-9:
            raise ValueError("bin_width must divide 1 into an integer number of bins")

    @property
    def n_bins(self) -> int:
        return round(1.0 / self.bin_width)

    @property
    def normalized_mode(self) -> bool:
        """Autoregressive pairs use the single-sided estimator."""
        return self.ansatz_kind == "arnn"

    def to_dict(self) -> dict:
        return asdict(self)

    def bin_index(self, fidelity: float) -> int:
        return min(int(fidelity / self.bin_width), self.n_bins - 1)

    def bin_center(self, index: int) -> float:
        return (index + 0.5) * self.bin_width


@dataclass
class StatePair:
    """One interpolation pair plus its exact summary."""

    psi: NeuralQuantumState
    phi: NeuralQuantumState
    magnitude: float
    summary: ExactSummary | None
    stream_key: tuple[int, ...]

    @property
    def fidelity(self) -> float:
        if self.summary is None:
            raise ValueError("pair was generated without an oracle summary")
        return min(self.summary.fidelity, 1.0)


def default_interpolation_grid(kind: str, n_sites: int, n_points: int) -> np.ndarray:
    """Log-spaced interpolation magnitudes covering the fidelity range."""
    if kind not in GRID_RANGE:
        raise ValueError(f"unknown ansatz kind {kind!r}")
    lo, hi = GRID_RANGE[kind]
    scale = math.sqrt(_REFERENCE_SITES / n_sites)
    if n_points == 1:
        return np.array([math.sqrt(lo * hi) * scale])
    return np.geomspace(lo, hi, n_points) * scale


def generate_state_pair(
    kind: str,
    n_sites: int,
    magnitude: float,
    seed_or_stream: int | RandomStream,
    *,
    with_summary: bool = True,
) -> StatePair:
    """Base state from the family's standard init, partner perturbed by
    ``magnitude`` along a seeded random unit direction."""
    stream = seed_or_stream if isinstance(seed_or_stream, RandomStream) else RandomStream(seed_or_stream)
    key = stream.key
    init_stream, direction_stream = stream.split(2)
    psi = random_ansatz(kind, n_sites, init_stream)
    direction = random_direction(psi.parameters.size, direction_stream)
    phi = perturb(psi, direction, magnitude)
    summary = None
    if with_summary:
        if n_sites > ORACLE_MAX_SITES:
            raise ValueError(f"oracle summary impossible for L = {n_sites} > {ORACLE_MAX_SITES}")
        summary = exact_summary(psi, phi)
    return StatePair(psi=psi, phi=phi, magnitude=magnitude, summary=summary, stream_key=key)


def pair_at_fidelity(
    kind: str,
    n_sites: int,
    target: float,
    seed_or_stream: int | RandomStream,
    *,
    tolerance: float = 0.02,
    max_iterations: int = 60,
) -> StatePair:
    """Search the interpolation magnitude for a pair with exact fidelity
    within ``tolerance`` of ``target``.

    Walks a ladder of magnitudes until two adjacent ones bracket the
    target fidelity, then bisects; continuity of fidelity in the
    magnitude guarantees a crossing inside the bracket.  A ray that
    never crosses the target (decoherence is not monotone for every
    family) is abandoned and the search retries with a fresh seeded
    direction.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target fidelity must lie strictly between 0 and 1")
    stream = seed_or_stream if isinstance(seed_or_stream, RandomStream) else RandomStream(seed_or_stream)
    key = stream.key
    attempts = stream.split(8)
    for attempt_stream in attempts:
        init_stream, direction_stream = attempt_stream.split(2)
        psi = random_ansatz(kind, n_sites, init_stream)
        direction = random_direction(psi.parameters.size, direction_stream)
        found = _bisect_fidelity(
            kind, n_sites, psi, direction, target, tolerance, max_iterations
        )
        if found is not None:
            magnitude, phi = found
            return StatePair(
                psi=psi,
                phi=phi,
                magnitude=magnitude,
                summary=exact_summary(psi, phi),
                stream_key=key,
            )
    raise ValueError(f"no pair at fidelity {target} found in {len(attempts)} attempts")


def _bisect_fidelity(kind, n_sites, psi, direction, target, tolerance, max_iterations):
    psi_table = exact_log_amplitudes(psi)

    def fidelity_at(t: float) -> float:
        phi = perturb(psi, direction, t)
        return fidelity_between_tables(psi_table, exact_log_amplitudes(phi))

    ladder = list(default_interpolation_grid(kind, n_sites, 40))
    for _ in range(8):
        ladder.append(ladder[-1] * 2.0)
    lo_t, lo_f = 0.0, 1.0
    hi_t = hi_f = None
    best_t, best_f = 0.0, 1.0
    for t in ladder:
        f = fidelity_at(t)
        if abs(f - target) < abs(best_f - target):
            best_t, best_f = t, f
        if (lo_f - target) * (f - target) <= 0.0:
            hi_t, hi_f = t, f
            break
        lo_t, lo_f = t, f
    if hi_t is None:
        return None
    for _ in range(max_iterations):
        if abs(best_f - target) <= tolerance:
            break
        mid = 0.5 * (lo_t + hi_t)
        f = fidelity_at(mid)
        if abs(f - target) < abs(best_f - target):
            best_t, best_f = mid, f
        if (lo_f - target) * (f - target) <= 0.0:
            hi_t, hi_f = mid, f
        else:
            lo_t, lo_f = mid, f
    if abs(best_f - target) > tolerance:
        return None
    return best_t, perturb(psi, direction, best_t)


# -- analytic predictions ------------------------------------------------------


def predicted_variance_single_sided(summary: ExactSummary, n_samples: int) -> float:
    """Exact variance of the single-sided ratio mean: ``Var(z_hat)/n``
    (equal to ``(1 - F)/n`` whenever the sampled state's support covers
    its partner's)."""
    return summary.var_z_normalized / n_samples


def predicted_variance_product(summary: ExactSummary, n_phi: int, n_psi: int) -> float:
    """Variance of the complex product of the two ratio means; this is
    the closed-form two-sided fidelity variance and is independent of
    the state pair given its fidelity."""
    return bd.fidelity_variance(min(summary.fidelity, 1.0), n_phi, n_psi)


def predicted_variance_re_product(summary: ExactSummary, n_phi: int, n_psi: int) -> float:
    """Exact variance of the real part of the ratio-mean product.

    ``Var(Re X) = (Var X + Re pseudoVar X) / 2`` where the pseudo
    variance of the product follows from the independence of the two
    means: ``pv(X) = ov^2 pv_w/n2 + conj(ov)^2 pv_z/n1 + pv_z pv_w/(n1 n2)``.
    The first term is the state-independent closed form; the pseudo
    corrections need the oracle's ratio moments.
    """
    var_product = predicted_variance_product(summary, n_phi, n_psi)
    ov = summary.overlap
    pv_z = summary.pseudo_var_z_normalized
    pv_w = summary.pseudo_var_w_normalized
    pseudo = ov**2 * pv_w / n_psi + np.conj(ov) ** 2 * pv_z / n_phi + pv_z * pv_w / (n_phi * n_psi)
    return 0.5 * (var_product + pseudo.real)


def overlap_region_radius(fidelity: float, n_total: int, delta: float) -> float:
    """Largest distance from the exact overlap to the boundary of the
    magnitude-interval x phase-cone confidence region."""
    halfwidth = bd.fidelity_halfwidth(fidelity, n_total, delta)
    lo, hi = bd.overlap_magnitude_interval(fidelity, halfwidth)
    dalpha = bd.phase_halfwidth(fidelity, n_total, delta)
    center = math.sqrt(fidelity)
    corners = [
        math.sqrt(max(0.0, m * m + fidelity - 2.0 * m * center * math.cos(dalpha)))
        for m in (lo, hi)
    ]
    return max(corners)


# -- repetition engine ---------------------------------------------------------


def _run_repetitions(
    spec: ExperimentSpec,
    pair: StatePair,
    rep_stream: RandomStream,
    n_samples: int | None = None,
) -> list[EstimateReport]:
    """All repetitions for one pair; repetitions are independent and own
    their substreams, so results do not depend on execution order."""
    n_total = n_samples if n_samples is not None else spec.n_samples
    reps = spec.repetitions
    if spec.normalized_mode:
        streams = rep_stream.split(reps)
        return [
            estimate_normalized(
                pair.psi, pair.phi, sample_exact_autoregressive(pair.phi, n_total, streams[r])
            )
            for r in range(reps)
        ]
    n_phi, n_psi = bd.split_sample_budget(n_total)
    settings = ChainSettings(burn_in_sweeps=spec.burn_in_sweeps)
    phi_stream, psi_stream = rep_stream.split(2)
    batches_phi = sample_metropolis_chains(pair.phi, n_phi, reps, phi_stream, settings)
    batches_psi = sample_metropolis_chains(pair.psi, n_psi, reps, psi_stream, settings)
    return [
        estimate_two_sided(pair.psi, pair.phi, batches_phi[r], batches_psi[r])
        for r in range(reps)
    ]


def _spread_pairs(spec: ExperimentSpec) -> list[tuple[StatePair, RandomStream]]:
    """Pairs on the default magnitude grid, one substream each."""
    root = RandomStream(spec.seed)
    grid = default_interpolation_grid(spec.ansatz_kind, spec.n_sites, spec.n_pairs)
    out = []
    for pair_stream in root.split(spec.n_pairs):
        gen_stream, rep_stream = pair_stream.split(2)
        index = len(out)
        pair = generate_state_pair(spec.ansatz_kind, spec.n_sites, float(grid[index]), gen_stream)
        out.append((pair, rep_stream))
    return out


@dataclass
class ExperimentResult:
    """Uniform result container: binned/point rows for CSV, full per-pair
    and per-estimate records (with their oracle fidelities and stream
    keys) for JSON, so every check can be re-derived from the files."""

    experiment: str
    spec: ExperimentSpec
    rows: list[dict]
    pairs: list[dict] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return _jsonify(
            {
                "experiment": self.experiment,
                "spec": self.spec.to_dict(),
                "rows": self.rows,
                "pairs": self.pairs,
                "extras": self.extras,
            }
        )

    def csv_header(self) -> list[str]:
        return list(self.rows[0].keys()) if self.rows else []

    def csv_rows(self) -> list[list]:
        header = self.csv_header()
        return [[_csv_cell(row.get(key)) for key in header] for row in self.rows]


def _jsonify(value):
    if isinstance(value, dict):
        return {key: _jsonify(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(item) for item in value]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return _jsonify(value.tolist())
    return value


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+}j"
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _pair_record(index: int, pair: StatePair) -> dict:
    summary = pair.summary
    return {
        "pair_index": index,
        "magnitude": pair.magnitude,
        "stream_key": list(pair.stream_key),
        "fidelity_exact": summary.fidelity,
        "overlap_exact": summary.overlap,
        "log_norm_psi": summary.log_norm_psi,
        "log_norm_phi": summary.log_norm_phi,
    }


def _sample_variance_and_se(values: np.ndarray) -> tuple[float, float]:
    """Unbiased variance of real samples and the standard error of that
    variance estimate (from the spread of squared deviations)."""
    centered = (values - values.mean()) ** 2
    variance = centered.sum() / (len(values) - 1)
    return float(variance), float(centered.std(ddof=1) / math.sqrt(len(values)))


def _complex_variance_and_se(values: np.ndarray) -> tuple[float, float]:
    centered = np.abs(values - values.mean()) ** 2
    variance = centered.sum() / (len(values) - 1)
    return float(variance), float(centered.std(ddof=1) / math.sqrt(len(values)))


# -- experiments ---------------------------------------------------------------


def run_variance_experiment(
    spec: ExperimentSpec, fidelity_targets: list[float] | None = None
) -> ExperimentResult:
    """Empirical versus analytic estimator variance per fidelity bin.

    Normalized mode: variance of the complex single-sided mean against
    ``Var(z_hat)/n``.  General mode: variance of the fidelity estimate
    (real part of the product) against its exact prediction, plus the
    complex product variance against the state-independent closed form.

    Pairs sit at fidelities spread over [0.05, 0.95] by default.  The
    extreme corners are excluded deliberately: two mutually singular
    states realize their ratio variance only through configurations of
    vanishing sampled probability, so no desk-scale run can observe it.
    """
    if fidelity_targets is None:
        fidelity_targets = list(np.linspace(0.05, 0.95, spec.n_pairs))
    rows = []
    pair_records = []
    root = RandomStream(spec.seed)
    pair_items = []
    for target, pair_stream in zip(fidelity_targets, root.split(len(fidelity_targets))):
        gen_stream, rep_stream = pair_stream.split(2)
        pair = pair_at_fidelity(spec.ansatz_kind, spec.n_sites, float(target), gen_stream)
        pair_items.append((pair, rep_stream))
    for index, (pair, rep_stream) in enumerate(pair_items):
        reports = _run_repetitions(spec, pair, rep_stream)
        summary = pair.summary
        row = {
            "pair_index": index,
            "mode": "normalized" if spec.normalized_mode else "two-sided",
            "fidelity_exact": pair.fidelity,
            "bin_center": spec.bin_center(spec.bin_index(pair.fidelity)),
            "n_estimates": len(reports),
            "n_samples": spec.n_samples,
        }
        if spec.normalized_mode:
            means = np.array([r.ratio_mean_phi for r in reports])
            empirical, se = _complex_variance_and_se(means)
            row.update(
                empirical_variance=empirical,
                predicted_variance=predicted_variance_single_sided(summary, spec.n_samples),
                variance_se=se,
                empirical_variance_product=None,
                predicted_variance_product=None,
                variance_product_se=None,
            )
        else:
            n_phi, n_psi = bd.split_sample_budget(spec.n_samples)
            fids = np.array([r.fidelity_estimate for r in reports])
            products = np.array([r.ratio_mean_phi * r.ratio_mean_psi for r in reports])
            empirical, se = _sample_variance_and_se(fids)
            emp_prod, se_prod = _complex_variance_and_se(products)
            row.update(
                empirical_variance=empirical,
                predicted_variance=predicted_variance_re_product(summary, n_phi, n_psi),
                variance_se=se,
                empirical_variance_product=emp_prod,
                predicted_variance_product=predicted_variance_product(summary, n_phi, n_psi),
                variance_product_se=se_prod,
            )
        rows.append(row)
        record = _pair_record(index, pair)
        record["estimates"] = [
            {"fidelity_estimate": r.fidelity_estimate, "ratio_mean_phi": r.ratio_mean_phi}
            for r in reports
        ]
        pair_records.append(record)
    return ExperimentResult("variance", spec, rows, pair_records)


def _estimate_records(spec: ExperimentSpec, pair: StatePair, reports: list[EstimateReport]):
    """Per-estimate error and coverage records for one pair."""
    summary = pair.summary
    fidelity = pair.fidelity
    overlap = summary.overlap
    n = spec.n_samples
    if spec.normalized_mode:
        radius = bd.overlap_radius_normalized(fidelity, n, spec.delta)
    else:
        radius = bd.fidelity_halfwidth(fidelity, n, spec.delta)
    records = []
    for r in reports:
        fidelity_error = abs(r.fidelity_estimate - fidelity)
        overlap_error = abs(r.overlap_estimate - overlap)
        if spec.normalized_mode:
            failed = abs(r.ratio_mean_phi - overlap) >= radius
        else:
            failed = fidelity_error >= radius
        records.append(
            {
                "fidelity_estimate": r.fidelity_estimate,
                "overlap_estimate": r.overlap_estimate,
                "fidelity_error": fidelity_error,
                "overlap_error": overlap_error,
                "coverage_failed": bool(failed),
                "overflow_count": r.overflow_count,
            }
        )
    return records


def run_bound_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Mean errors and coverage failures per fidelity bin, with the
    analytic curves evaluated at the bin centers."""
    per_bin: dict[int, list[dict]] = {}
    pair_records = []
    for index, (pair, rep_stream) in enumerate(_spread_pairs(spec)):
        reports = _run_repetitions(spec, pair, rep_stream)
        records = _estimate_records(spec, pair, reports)
        per_bin.setdefault(spec.bin_index(pair.fidelity), []).extend(records)
        record = _pair_record(index, pair)
        record["estimates"] = records
        pair_records.append(record)

    rows = []
    n = spec.n_samples
    for bin_index in sorted(per_bin):
        records = per_bin[bin_index]
        center = spec.bin_center(bin_index)
        center_f = min(center, 1.0)
        fid_errors = np.array([r["fidelity_error"] for r in records])
        ov_errors = np.array([r["overlap_error"] for r in records])
        failures = np.array([r["coverage_failed"] for r in records])
        if spec.normalized_mode:
            radius = bd.overlap_radius_normalized(center_f, n, spec.delta)
            fidelity_curve = bd.fidelity_halfwidth_normalized(center_f, radius)
            overlap_curve = radius
        else:
            fidelity_curve = bd.fidelity_halfwidth(center_f, n, spec.delta)
            overlap_curve = overlap_region_radius(center_f, n, spec.delta)
        rows.append(
            {
                "bin_center": center,
                "count": len(records),
                "mean_abs_fidelity_error": float(fid_errors.mean()),
                "fidelity_error_spread": float(fid_errors.std(ddof=1)) if len(records) > 1 else 0.0,
                "mean_abs_overlap_error": float(ov_errors.mean()),
                "overlap_error_spread": float(ov_errors.std(ddof=1)) if len(records) > 1 else 0.0,
                "empirical_variance": float(fid_errors.var(ddof=1)) if len(records) > 1 else 0.0,
                "coverage_failure_rate": float(failures.mean()),
                "fidelity_bound_curve": fidelity_curve,
                "overlap_bound_curve": overlap_curve,
                "delta": spec.delta,
            }
        )
    return ExperimentResult("bounds", spec, rows, pair_records)


def run_scaling_experiment(spec: ExperimentSpec, n_grid: list[int]) -> ExperimentResult:
    """Mean fidelity error versus sample count at fidelity ~ 0.5.

    The same pairs (exact fidelity inside [0.45, 0.55]) are reused for
    every sample count, so pair-to-pair scatter cancels out of the
    fitted slope.  With fewer than two grid points no fit is attempted.
    """
    if sorted(n_grid) != list(n_grid):
        raise ValueError("n_grid must be ascending")
    root = RandomStream(spec.seed)
    pairs = []
    for pair_stream in root.split(spec.n_pairs):
        gen_stream, rep_stream = pair_stream.split(2)
        pair = pair_at_fidelity(spec.ansatz_kind, spec.n_sites, 0.5, gen_stream, tolerance=0.04)
        if not 0.45 <= pair.fidelity <= 0.55:
            raise ValueError(f"search returned fidelity {pair.fidelity} outside the window")
        pairs.append((pair, rep_stream.split(len(n_grid))))

    rows = []
    pair_records = [_pair_record(i, pair) for i, (pair, _) in enumerate(pairs)]
    for grid_index, n_total in enumerate(n_grid):
        errors = []
        for pair, rep_streams in pairs:
            reports = _run_repetitions(spec, pair, rep_streams[grid_index], n_samples=n_total)
            errors.extend(abs(r.fidelity_estimate - pair.fidelity) for r in reports)
        errors = np.array(errors)
        rows.append(
            {
                "n_samples": n_total,
                "mean_abs_fidelity_error": float(errors.mean()),
                "standard_error": float(errors.std(ddof=1) / math.sqrt(len(errors))),
                "count": len(errors),
            }
        )
    slope, slope_se = fit_loglog_slope(
        [row["n_samples"] for row in rows], [row["mean_abs_fidelity_error"] for row in rows]
    )
    extras = {"slope": slope, "slope_stderr": slope_se, "fidelity_window": [0.45, 0.55]}
    return ExperimentResult("scaling", spec, rows, pair_records, extras)


def run_size_experiment(spec: ExperimentSpec, size_grid: list[int]) -> ExperimentResult:
    """Mean fidelity error versus system size at matched fidelity.

    The cross-size comparison uses a clustered standard error (spread of
    per-pair means) so pair-to-pair variation is not mistaken for a size
    effect.
    """
    if any(size > ORACLE_MAX_SITES for size in size_grid):
        raise ValueError(f"size grid exceeds the oracle ceiling {ORACLE_MAX_SITES}")
    root = RandomStream(spec.seed)
    rows = []
    pair_records = []
    size_streams = root.split(len(size_grid))
    for size, size_stream in zip(size_grid, size_streams):
        pair_means = []
        errors = []
        for pair_stream in size_stream.split(spec.n_pairs):
            gen_stream, rep_stream = pair_stream.split(2)
            pair = pair_at_fidelity(spec.ansatz_kind, size, 0.5, gen_stream, tolerance=0.04)
            reports = _run_repetitions(spec, pair, rep_stream)
            pair_errors = np.array([abs(r.fidelity_estimate - pair.fidelity) for r in reports])
            errors.extend(pair_errors)
            pair_means.append(pair_errors.mean())
            record = _pair_record(len(pair_records), pair)
            record["n_sites"] = size
            pair_records.append(record)
        errors = np.array(errors)
        pair_means = np.array(pair_means)
        clustered_se = (
            float(pair_means.std(ddof=1) / math.sqrt(len(pair_means)))
            if len(pair_means) > 1
            else float(errors.std(ddof=1) / math.sqrt(len(errors)))
        )
        rows.append(
            {
                "n_sites": size,
                "mean_abs_fidelity_error": float(errors.mean()),
                "standard_error": float(errors.std(ddof=1) / math.sqrt(len(errors))),
                "clustered_se": clustered_se,
                "count": len(errors),
            }
        )
    max_z = 0.0
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            gap = abs(rows[i]["mean_abs_fidelity_error"] - rows[j]["mean_abs_fidelity_error"])
            combined = math.hypot(rows[i]["clustered_se"], rows[j]["clustered_se"])
            max_z = max(max_z, gap / combined)
    return ExperimentResult("size", spec, rows, pair_records, {"max_pairwise_z": max_z})


def fit_loglog_slope(xs: list[float], ys: list[float]) -> tuple[float | None, float | None]:
    """Least-squares slope of log(y) against log(x); (None, None) when
    fewer than two points make a fit meaningless."""
    if len(xs) < 2:
        return None, None
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    if len(xs) == 2:
        # an exact two-point line has no residual to scale an error by
        return float((ly[1] - ly[0]) / (lx[1] - lx[0])), None
    coeffs, cov = np.polyfit(lx, ly, 1, cov=True)
    return float(coeffs[0]), float(math.sqrt(cov[0, 0]))


# -- output --------------------------------------------------------------------


def emit(result: ExperimentResult, path: str, fmt: str) -> None:
    """Write an experiment result as CSV (binned rows) or JSON (full
    spec echo, per-pair records with stream keys, and rows)."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(result.csv_header())
                writer.writerows(result.csv_rows())
        else:
            with open(path, "w") as fh:
                json.dump(result.to_json_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
    except OSError as err:
        raise OSError(f"cannot write results to {path!r}: {err}") from err
