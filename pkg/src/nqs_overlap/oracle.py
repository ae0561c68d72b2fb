"""Exact full-basis sums: norms, overlaps, fidelity, ratio moments.

Ground truth for every estimator and bound test.  All sums stream over
the basis in chunks and accumulate against a running max-log offset, so
states whose log magnitudes grow with system size cannot overflow the
accumulation.  The ceiling ``L <= 24`` keeps a full pass desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import NeuralQuantumState
from .configs import ENUMERATION_MAX_SITES, basis_ranges, unpack_batch

#: Largest system size for which full enumeration is allowed.
ORACLE_MAX_SITES = ENUMERATION_MAX_SITES


class _OffsetSum:
    """Streaming sum of ``exp(log_terms)`` with a running max-log offset.

    Tracks ``total = sum_i exp(t_i - offset)`` and the real offset, so the
    result ``exp(offset) * total`` never overflows during accumulation.
    """

    def __init__(self, complex_valued: bool):
        self.offset = -np.inf
        self.total = 0.0 + 0.0j if complex_valued else 0.0

    def add(self, log_terms: np.ndarray, keep: np.ndarray | None = None) -> None:
        if keep is not None:
            log_terms = log_terms[keep]
        if log_terms.size == 0:
            return
        real = log_terms.real if np.iscomplexobj(log_terms) else log_terms
        block_max = float(real.max())
        if block_max == -np.inf:
            return
        offset = max(self.offset, block_max)
        if offset > self.offset and self.offset != -np.inf:
            self.total = self.total * np.exp(self.offset - offset)
        self.offset = offset
        self.total = self.total + np.exp(log_terms - offset).sum()

    def log_abs(self) -> float:
        """``log |sum|``; -inf for an empty or cancelled sum."""
        mag = abs(self.total)
        if mag == 0.0:
            return -np.inf
        return self.offset + float(np.log(mag))

    def value(self, log_scale: float = 0.0):
        """``exp(-log_scale) * sum``, evaluated overflow-safely."""
        mag = abs(self.total)
        if mag == 0.0:
            return 0.0 * self.total
        return self.total / mag * np.exp(self.offset - log_scale + np.log(mag))


def _check_oracle_size(n_sites: int) -> None:
    if n_sites > ORACLE_MAX_SITES:
        raise ValueError(
            f"exact enumeration over {n_sites} sites exceeds the L <= {ORACLE_MAX_SITES} ceiling"
        )


def _resolve_sites(ansatz: NeuralQuantumState, n_sites: int | None) -> int:
    if n_sites is None:
        n_sites = ansatz.n_sites
    if n_sites != ansatz.n_sites:
        raise ValueError(f"ansatz has {ansatz.n_sites} sites, not {n_sites}")
    _check_oracle_size(n_sites)
    return n_sites


@dataclass(frozen=True)
class ExactSummary:
    """Exact quantities for a state pair from one full-basis pass.

    Ratio moments are stored in the unit-normalized frame: with
    ``psi_hat = psi / sqrt(N_psi)`` and ``phi_hat = phi / sqrt(N_phi)``,
    the forward ratio is ``z_hat(s) = psi_hat(s) / phi_hat(s)`` under the
    phi distribution (mean = overlap, variance = 1 - F when phi's
    support covers psi's), and ``w_hat`` mirrors it in reverse.  The
    normalized frame keeps every stored number O(1); the raw-ratio
    moments are exposed as properties that rescale by the norm ratio and
    saturate to inf when the norms are too mismatched for float range.
    """

    n_sites: int
    log_norm_psi: float
    log_norm_phi: float
    overlap: complex
    fidelity: float
    var_z_normalized: float
    var_w_normalized: float
    pseudo_var_z_normalized: complex
    pseudo_var_w_normalized: complex

    def __post_init__(self):
        if abs(abs(self.overlap) ** 2 - self.fidelity) > 1e-12:
            raise ValueError("fidelity inconsistent with |overlap|^2")
        if not -1e-12 <= self.fidelity <= 1.0 + 1e-12:
            raise ValueError(f"fidelity {self.fidelity} outside [0, 1]")

    @property
    def norm_psi(self) -> float:
        return float(np.exp(self.log_norm_psi))

    @property
    def norm_phi(self) -> float:
        return float(np.exp(self.log_norm_phi))

    @property
    def norm_ratio(self) -> float:
        """N_psi / N_phi, evaluated in the log domain."""
        with np.errstate(over="ignore"):
            return float(np.exp(np.float64(self.log_norm_psi - self.log_norm_phi)))

    @property
    def mean_z(self) -> complex:
        """Exact mean of the raw forward ratio: ``sqrt(N_psi/N_phi) * overlap``."""
        with np.errstate(over="ignore"):
            return complex(np.exp(np.float64(0.5 * (self.log_norm_psi - self.log_norm_phi))) * self.overlap)

    @property
    def mean_w(self) -> complex:
        with np.errstate(over="ignore"):
            return complex(
                np.exp(np.float64(0.5 * (self.log_norm_phi - self.log_norm_psi)))
                * np.conj(self.overlap)
            )

    @property
    def var_z(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.float64(self.norm_ratio) * self.var_z_normalized)

    @property
    def var_w(self) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            return float(np.exp(np.float64(self.log_norm_phi - self.log_norm_psi)) * self.var_w_normalized)


def exact_log_norm(
    ansatz: NeuralQuantumState, n_sites: int | None = None, *, reverse_order: bool = False
) -> float:
    """``log sum_s |amplitude(s)|^2`` by full enumeration."""
    n_sites = _resolve_sites(ansatz, n_sites)
    acc = _OffsetSum(complex_valued=False)
    for start, stop in basis_ranges(n_sites, reverse=reverse_order):
        block = unpack_batch(np.arange(start, stop), n_sites)
        acc.add(2.0 * ansatz.log_amplitude_batch(block).real)
    return acc.log_abs()


def exact_norm(ansatz: NeuralQuantumState, n_sites: int | None = None) -> float:
    """Squared norm ``N = sum_s |amplitude(s)|^2`` (may overflow to inf
    for extreme parameters; prefer :func:`exact_log_norm` then)."""
    return float(np.exp(exact_log_norm(ansatz, n_sites)))


def exact_summary(
    psi: NeuralQuantumState,
    phi: NeuralQuantumState,
    n_sites: int | None = None,
    *,
    reverse_order: bool = False,
) -> ExactSummary:
    """Norms, overlap, fidelity and exact ratio moments in one pass.

    Ratio moments skip basis states where the sampled-from state has a
    vanishing amplitude: those states have probability zero, so they
    never contribute to the estimator either.
    """
    n_sites = _resolve_sites(psi, n_sites)
    if phi.n_sites != n_sites:
        raise ValueError("state pair has mismatched site counts")

    norm_psi = _OffsetSum(False)
    norm_phi = _OffsetSum(False)
    cross = _OffsetSum(True)  # sum psi(s) * conj(phi(s))
    z_abs2 = _OffsetSum(False)  # sum |psi|^2 over supp(phi)
    w_abs2 = _OffsetSum(False)  # sum |phi|^2 over supp(psi)
    z_sq = _OffsetSum(True)  # sum psi^2 conj(phi)/phi over supp(phi)
    w_sq = _OffsetSum(True)  # sum phi^2 conj(psi)/psi over supp(psi)

    for start, stop in basis_ranges(n_sites, reverse=reverse_order):
        block = unpack_batch(np.arange(start, stop), n_sites)
        lp = psi.log_amplitude_batch(block)
        lf = phi.log_amplitude_batch(block)
        psi_support = lp.real > -np.inf
        phi_support = lf.real > -np.inf
        both = psi_support & phi_support

        # arithmetic on -inf log amplitudes is discarded by the masks;
        # silence the spurious invalid-value warnings it would emit
        with np.errstate(invalid="ignore"):
            norm_psi.add(2.0 * lp.real)
            norm_phi.add(2.0 * lf.real)
            cross.add(lp + np.conj(lf), keep=both)
            z_abs2.add(2.0 * lp.real, keep=phi_support)
            w_abs2.add(2.0 * lf.real, keep=psi_support)
            z_sq.add(2.0 * lp - 2j * lf.imag, keep=phi_support)
            w_sq.add(2.0 * lf - 2j * lp.imag, keep=psi_support)

    log_n_psi = norm_psi.log_abs()
    log_n_phi = norm_phi.log_abs()
    if log_n_psi == -np.inf or log_n_phi == -np.inf:
        raise ValueError("cannot normalize a state whose amplitudes all vanish")

    overlap = complex(cross.value(0.5 * (log_n_psi + log_n_phi)))
    fidelity = abs(overlap) ** 2

    # moments in the unit-normalized frame; every term here is O(1)
    second_z = float(z_abs2.value(log_n_psi))  # E |z_hat|^2 = sum_{supp phi} |psi_hat|^2
    second_w = float(w_abs2.value(log_n_phi))
    square_z = complex(z_sq.value(log_n_psi))  # E z_hat^2
    square_w = complex(w_sq.value(log_n_phi))

    return ExactSummary(
        n_sites=n_sites,
        log_norm_psi=log_n_psi,
        log_norm_phi=log_n_phi,
        overlap=overlap,
        fidelity=fidelity,
        var_z_normalized=second_z - fidelity,
        var_w_normalized=second_w - fidelity,
        pseudo_var_z_normalized=square_z - overlap**2,
        pseudo_var_w_normalized=square_w - np.conj(overlap) ** 2,
    )


def exact_overlap(
    psi: NeuralQuantumState, phi: NeuralQuantumState, n_sites: int | None = None
) -> complex:
    """Normalized overlap ``sum_s psi(s) conj(phi(s)) / sqrt(N_psi N_phi)``."""
    return exact_summary(psi, phi, n_sites).overlap


def exact_fidelity(
    psi: NeuralQuantumState, phi: NeuralQuantumState, n_sites: int | None = None
) -> float:
    """``|exact_overlap|^2``."""
    return exact_summary(psi, phi, n_sites).fidelity


def exact_var_ratios(
    psi: NeuralQuantumState, phi: NeuralQuantumState, n_sites: int | None = None
) -> tuple[float, float]:
    """Exact variances of the two amplitude ratios, by direct summation."""
    summary = exact_summary(psi, phi, n_sites)
    return summary.var_z, summary.var_w


def exact_log_amplitudes(ansatz: NeuralQuantumState, n_sites: int | None = None) -> np.ndarray:
    """Full table of complex log amplitudes in pack order (L <= 20)."""
    n_sites = _resolve_sites(ansatz, n_sites)
    if n_sites > 20:
        raise ValueError("full amplitude tables are limited to L <= 20")
    out = np.empty(1 << n_sites, dtype=np.complex128)
    for start, stop in basis_ranges(n_sites):
        block = unpack_batch(np.arange(start, stop), n_sites)
        out[start:stop] = ansatz.log_amplitude_batch(block)
    return out


def exact_probabilities(ansatz: NeuralQuantumState, n_sites: int | None = None) -> np.ndarray:
    """Normalized Born probabilities ``|amp|^2 / N`` in pack order (L <= 20)."""
    table = exact_log_amplitudes(ansatz, n_sites)
    log_w = 2.0 * table.real
    m = log_w.max()
    w = np.exp(log_w - m)
    return w / w.sum()


def fidelity_between_tables(log_amps_a: np.ndarray, log_amps_b: np.ndarray) -> float:
    """Fidelity from two precomputed log-amplitude tables.

    Lets fidelity-targeted searches reuse one state's table across many
    candidate partners.
    """
    if log_amps_a.shape != log_amps_b.shape:
        raise ValueError("amplitude tables must have equal length")
    support = (log_amps_a.real > -np.inf) & (log_amps_b.real > -np.inf)
    cross = _OffsetSum(True)
    cross.add(log_amps_a[support] + np.conj(log_amps_b[support]))
    na = _OffsetSum(False)
    na.add(2.0 * log_amps_a.real)
    nb = _OffsetSum(False)
    nb.add(2.0 * log_amps_b.real)
    overlap = cross.value(0.5 * (na.log_abs() + nb.log_abs()))
    return abs(complex(overlap)) ** 2
