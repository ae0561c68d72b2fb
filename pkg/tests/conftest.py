"""Shared test helpers."""

import numpy as np
import pytest

from nqs_overlap.ansatz import NeuralQuantumState
from nqs_overlap.configs import pack


class TableState(NeuralQuantumState):
    """Test double: a state defined by an explicit amplitude table.

    Amplitudes are given in pack order; zeros map to log magnitude -inf.
    Lets tests build states with exactly known overlaps, disjoint
    supports, and so on.
    """

    def __init__(self, amplitudes, normalized=False):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        self.n_sites = int(np.log2(amplitudes.size))
        if 2**self.n_sites != amplitudes.size:
            raise ValueError("table length must be a power of two")
        if normalized:
            amplitudes = amplitudes / np.linalg.norm(amplitudes)
        self._amplitudes = amplitudes
        self._normalized = normalized

    @property
    def is_normalized(self):
        return self._normalized

    @property
    def parameters(self):
        return np.concatenate([self._amplitudes.real, self._amplitudes.imag])

    def with_parameters(self, values):
        half = values.size // 2
        return TableState(values[:half] + 1j * values[half:], self._normalized)

    def log_amplitude_batch(self, configs):
        configs = self._check_batch(configs)
        indices = np.array([pack(c) for c in configs])
        amps = self._amplitudes[indices]
        with np.errstate(divide="ignore"):
            return np.where(
                amps == 0,
                -np.inf + 0j,
                np.log(np.where(amps == 0, 1.0, amps)),
            )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
