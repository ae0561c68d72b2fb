"""Closed-form concentration bounds for overlap and fidelity estimates.

All functions are pure scalar maps with validated inputs; none of them
lets a NaN escape (the phase cone degrades to ``pi`` instead).  ``delta``
is the failure probability of the bound; the equivalent number of
standard deviations ``1/sqrt(delta)`` stays internal.

Two sampling protocols appear throughout:

* normalized, single sided -- all ``n`` samples come from one state and
  the overlap is read off a single ratio mean;
* general, two sided -- the budget is split ``n1 + n2 = n`` between the
  two states (equal split is optimal) and fidelity comes from the
  product of the two ratio means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def _check_fidelity(fidelity: float) -> float:
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {fidelity}")
    return float(fidelity)


def _check_delta(delta: float) -> float:
    if not 0.0 < delta < 1.0:
        raise ValueError(f"failure probability must lie in (0, 1), got {delta}")
    return float(delta)


def _check_count(n: int, name: str = "sample count") -> int:
    if n < 1:
        raise ValueError(f"{name} must be >= 1, got {n}")
    return int(n)


def overlap_radius_normalized(fidelity: float, n_samples: int, delta: float) -> float:
    """Radius of the complex disk around the true overlap:
    ``sqrt((1 - F) / (n1 * delta))`` for normalized states."""
    fidelity = _check_fidelity(fidelity)
    n_samples = _check_count(n_samples)
    delta = _check_delta(delta)
    return math.sqrt((1.0 - fidelity) / (n_samples * delta))


def required_samples_normalized(radius: float, delta: float) -> int:
    """Samples needed for a given overlap radius at the worst case F = 0:
    ``ceil(1 / (radius^2 * delta))``, with a relative 1e-9 allowance so
    float noise cannot push the ceiling past an exact integer budget."""
    if not 0.0 < radius <= 1.0:
        raise ValueError(f"target radius must lie in (0, 1], got {radius}")
    delta = _check_delta(delta)
    exact = 1.0 / (radius**2 * delta)
    return max(1, math.ceil(exact * (1.0 - 1e-9)))


def fidelity_halfwidth_normalized(fidelity: float, radius: float) -> float:
    """Half-width of the fidelity interval implied by an overlap radius:
    ``2 * radius * sqrt(F) + radius^2``."""
    fidelity = _check_fidelity(fidelity)
    if radius < 0.0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    return 2.0 * radius * math.sqrt(fidelity) + radius**2


def fidelity_variance(fidelity: float, n_phi: int, n_psi: int) -> float:
    """Variance of the two-sided fidelity estimator:
    ``F(1-F)(n1+n2)/(n1 n2) + (1-F)^2/(n1 n2)``."""
    fidelity = _check_fidelity(fidelity)
    n_phi = _check_count(n_phi)
    n_psi = _check_count(n_psi)
    spread = 1.0 - fidelity
    return fidelity * spread * (n_phi + n_psi) / (n_phi * n_psi) + spread**2 / (n_phi * n_psi)


def fidelity_halfwidth(fidelity: float, n_total: int, delta: float) -> float:
    """Fidelity error radius for the optimal equal split ``n1 = n2 = n/2``:
    ``2*sqrt((F(1-F) + (1-F)^2/n) / (n*delta))``."""
    fidelity = _check_fidelity(fidelity)
    n_total = _check_count(n_total, "total sample count")
    delta = _check_delta(delta)
    spread = 1.0 - fidelity
    return 2.0 * math.sqrt((fidelity * spread + spread**2 / n_total) / (n_total * delta))


def fidelity_halfwidth_taylor(fidelity: float, n_total: int, delta: float) -> float:
    """Large-n expansion of :func:`fidelity_halfwidth`:
    ``2*sqrt(F(1-F)/(n*delta)) + (1-F)^2/(n^2*delta)``.

    Accurate for F bounded away from 0; at F = 0 the leading term
    vanishes and the expansion underestimates the exact value badly.
    """
    fidelity = _check_fidelity(fidelity)
    n_total = _check_count(n_total, "total sample count")
    delta = _check_delta(delta)
    spread = 1.0 - fidelity
    return 2.0 * math.sqrt(fidelity * spread / (n_total * delta)) + spread**2 / (
        n_total**2 * delta
    )


def median_of_means_halfwidth(n_total: int, delta: float) -> float:
    """Error radius of the median-of-means baseline at equal failure
    probability: ``8 * sqrt(ln(1/delta) / n)`` (from
    ``delta = exp(-n * eps^2 / 64)``)."""
    n_total = _check_count(n_total, "total sample count")
    delta = _check_delta(delta)
    return 8.0 * math.sqrt(math.log(1.0 / delta) / n_total)


def chebyshev_tighter_than_median(fidelity: float, n_total: int, delta: float) -> bool:
    """Whether the variance-based radius beats the median-of-means one:
    ``F(1-F) + (1-F)^2/n < -16 * delta * ln(delta)``."""
    fidelity = _check_fidelity(fidelity)
    n_total = _check_count(n_total, "total sample count")
    delta = _check_delta(delta)
    spread = 1.0 - fidelity
    return fidelity * spread + spread**2 / n_total < -16.0 * delta * math.log(delta)


def phase_halfwidth(fidelity: float, n_total: int, delta: float) -> float:
    """Half-width of the overlap phase cone, in radians:
    ``arcsin(2*sqrt(F(1-F) + (1-F)^2/n) / sqrt(F*n*delta))``.

    When the argument exceeds 1 (or F = 0) the phase is unconstrained and
    the half-width is defined as ``pi``.
    """
    fidelity = _check_fidelity(fidelity)
    n_total = _check_count(n_total, "total sample count")
    delta = _check_delta(delta)
    if fidelity == 0.0:
        return math.pi
    spread = 1.0 - fidelity
    argument = (
        2.0
        * math.sqrt(fidelity * spread + spread**2 / n_total)
        / math.sqrt(fidelity * n_total * delta)
    )
    if argument > 1.0:
        return math.pi
    return math.asin(argument)


def overlap_magnitude_interval(fidelity: float, halfwidth: float) -> tuple[float, float]:
    """Interval containing the overlap-magnitude estimator
    ``sqrt(|product of ratio means|)``, clamped into [0, 1]."""
    fidelity = _check_fidelity(fidelity)
    if halfwidth < 0.0:
        raise ValueError(f"halfwidth must be nonnegative, got {halfwidth}")
    lo = math.sqrt(max(0.0, fidelity - halfwidth))
    hi = min(1.0, math.sqrt(min(1.0 + halfwidth, fidelity + halfwidth)))
    return lo, hi


def split_sample_budget(n_total: int) -> tuple[int, int]:
    """Optimal split of a total budget between the two states; odd totals
    give the extra sample to the first side."""
    n_total = _check_count(n_total, "total sample count")
    n_phi = (n_total + 1) // 2
    return n_phi, n_total - n_phi


@dataclass(frozen=True)
class BoundInputs:
    """Validated inputs shared by all bounds.

    ``n_phi``/``n_psi`` default to the optimal equal split of ``n_total``
    and are used by the two-sided quantities; the normalized-protocol
    radius spends the whole budget on one state (``n1 = n_total``), which
    is how the two protocols are compared at equal cost.
    """

    fidelity: float
    n_total: int
    delta: float
    n_phi: int = 0
    n_psi: int = 0

    def __post_init__(self):
        _check_fidelity(self.fidelity)
        _check_count(self.n_total, "total sample count")
        _check_delta(self.delta)
        if self.n_phi == 0 and self.n_psi == 0:
            n_phi, n_psi = split_sample_budget(self.n_total)
            object.__setattr__(self, "n_phi", n_phi)
            object.__setattr__(self, "n_psi", n_psi)
        if self.n_phi + self.n_psi != self.n_total:
            raise ValueError("n_phi + n_psi must equal n_total")
        if self.n_phi < 1 or self.n_psi < 0:
            raise ValueError("invalid sample split")


@dataclass(frozen=True)
class BoundReport:
    """Every closed-form bound evaluated at one (F, n, delta) point."""

    inputs: BoundInputs
    overlap_radius: float
    fidelity_halfwidth_normalized: float
    fidelity_halfwidth: float
    phase_halfwidth: float
    magnitude_interval: tuple[float, float]
    median_halfwidth: float
    chebyshev_tighter: bool

    def __post_init__(self):
        lo, hi = self.magnitude_interval
        if lo > hi:
            raise ValueError("magnitude interval inverted")
        for value in (
            self.overlap_radius,
            self.fidelity_halfwidth_normalized,
            self.fidelity_halfwidth,
            self.phase_halfwidth,
            self.median_halfwidth,
        ):
            if value < 0.0:
                raise ValueError("bounds must be nonnegative")


def bound_report(fidelity: float, n_total: int, delta: float) -> BoundReport:
    """Assemble a full :class:`BoundReport` for one experiment setting."""
    inputs = BoundInputs(fidelity=fidelity, n_total=n_total, delta=delta)
    radius = overlap_radius_normalized(fidelity, n_total, delta)
    halfwidth = fidelity_halfwidth(fidelity, n_total, delta)
    return BoundReport(
        inputs=inputs,
        overlap_radius=radius,
        fidelity_halfwidth_normalized=fidelity_halfwidth_normalized(fidelity, radius),
        fidelity_halfwidth=halfwidth,
        phase_halfwidth=phase_halfwidth(fidelity, n_total, delta),
        magnitude_interval=overlap_magnitude_interval(fidelity, halfwidth),
        median_halfwidth=median_of_means_halfwidth(n_total, delta),
        chebyshev_tighter=chebyshev_tighter_than_median(fidelity, n_total, delta),
    )
