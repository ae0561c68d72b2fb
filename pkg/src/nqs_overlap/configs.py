"""Spin-1/2 configuration space and the seeded randomness contract.

Conventions used everywhere in this package:

* A configuration of ``L`` sites is a length-``L`` numpy array of ``int8``
  with entries ``+1`` (spin up) and ``-1`` (spin down).  Batches are 2-d
  arrays of shape ``(n, L)``.
* Site 0 is the least significant bit of the packed basis index, and an
  up spin maps to bit value 1.  This makes the all-down configuration
  index 0 and the all-up configuration index ``2**L - 1``.
* Configurations are treated as immutable values; operations that modify
  a configuration return a copy.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

#: Largest site count for which packed indices fit a nonnegative int64.
PACK_MAX_SITES = 63

#: Hard ceiling for full-basis enumeration (2**24 = 16.7M states).  Above
#: this a full sweep stops being a desk-scale computation, so we refuse
#: rather than silently start an exponential job.
ENUMERATION_MAX_SITES = 24

#: Chunk size used when streaming the basis in blocks.
BASIS_CHUNK = 1 << 16


def _check_sites(n_sites: int, limit: int) -> None:
    if not isinstance(n_sites, (int, np.integer)) or n_sites < 1:
        raise ValueError(f"site count must be a positive integer, got {n_sites!r}")
    if n_sites > limit:
        raise ValueError(f"site count {n_sites} exceeds supported limit {limit}")


def pack(config: np.ndarray) -> int:
    """Map a +-1 configuration to its basis index (site 0 = LSB, up = 1)."""
    config = np.asarray(config)
    _check_sites(config.shape[-1] if config.ndim else 0, PACK_MAX_SITES)
    if config.ndim != 1:
        raise ValueError("pack expects a single 1-d configuration")
    bits = (config > 0).astype(np.int64)
    weights = np.int64(1) << np.arange(config.size, dtype=np.int64)
    return int(bits @ weights)


def unpack(index: int, n_sites: int) -> np.ndarray:
    """Inverse of :func:`pack`: basis index -> +-1 configuration."""
    _check_sites(n_sites, PACK_MAX_SITES)
    index = int(index)
    if not 0 <= index < (1 << n_sites):
        raise ValueError(f"index {index} outside [0, 2**{n_sites})")
    return unpack_batch(np.array([index], dtype=np.int64), n_sites)[0]


def unpack_batch(indices: np.ndarray, n_sites: int) -> np.ndarray:
    """Vectorized :func:`unpack`; returns an ``(n, L)`` int8 array."""
    _check_sites(n_sites, PACK_MAX_SITES)
    indices = np.asarray(indices, dtype=np.int64)
    bits = (indices[:, None] >> np.arange(n_sites, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def enumerate_basis(n_sites: int) -> Iterator[np.ndarray]:
    """Yield all ``2**L`` configurations exactly once, in pack order.

    Refuses ``L > ENUMERATION_MAX_SITES`` to prevent accidental
    exponential blowup.
    """
    _check_sites(n_sites, ENUMERATION_MAX_SITES)
    for start, stop in basis_ranges(n_sites):
        block = unpack_batch(np.arange(start, stop, dtype=np.int64), n_sites)
        yield from block


def basis_ranges(
    n_sites: int, chunk: int = BASIS_CHUNK, reverse: bool = False
) -> Iterator[tuple[int, int]]:
    """Index ranges covering ``[0, 2**L)`` in blocks of at most ``chunk``."""
    _check_sites(n_sites, ENUMERATION_MAX_SITES)
    total = 1 << n_sites
    starts = range(0, total, chunk)
    if reverse:
        starts = reversed(starts)
    for start in starts:
        yield start, min(start + chunk, total)


def flip(config: np.ndarray, site: int) -> np.ndarray:
    """Return a copy of ``config`` with the spin at ``site`` reversed."""
    config = np.asarray(config)
    if not 0 <= site < config.shape[-1]:
        raise ValueError(f"site {site} out of range for {config.shape[-1]} sites")
    flipped = config.copy()
    flipped[site] = -flipped[site]
    return flipped


def random_configuration(n_sites: int, generator: np.random.Generator) -> np.ndarray:
    """Draw a configuration uniformly from the full basis."""
    _check_sites(n_sites, PACK_MAX_SITES)
    return (2 * generator.integers(0, 2, size=n_sites) - 1).astype(np.int8)


class RandomStream:
    """Deterministic, splittable random source.

    Thin wrapper around :class:`numpy.random.SeedSequence` (PCG64).  Two
    streams built from the same seed and the same split path produce
    identical draws on every platform.  Each stream is single-owner: hand
    substreams (from :meth:`split`) to concurrent workers instead of
    sharing one generator.
    """

    def __init__(self, seed: int | None = None, *, _sequence: np.random.SeedSequence | None = None):
        if _sequence is not None:
            self._sequence = _sequence
        else:
            if seed is None or isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
                raise ValueError(f"seed must be an integer, got {seed!r}")
            self._sequence = np.random.SeedSequence(int(seed))
        self._generator: np.random.Generator | None = None

    @property
    def key(self) -> tuple[int, ...]:
        """(root entropy, split path) identifying this stream; serializable."""
        entropy = self._sequence.entropy
        spawn_key = self._sequence.spawn_key
        if isinstance(entropy, (list, tuple)):
            entropy = entropy[0]
        return (int(entropy), *map(int, spawn_key))

    @property
    def generator(self) -> np.random.Generator:
        """The underlying stateful generator (created lazily, then reused)."""
        if self._generator is None:
            self._generator = np.random.Generator(np.random.PCG64(self._sequence))
        return self._generator

    def split(self, n_children: int) -> list["RandomStream"]:
        """Spawn ``n_children`` independent substreams (stateful counter)."""
        if n_children < 0:
            raise ValueError("cannot split into a negative number of streams")
        return [RandomStream(_sequence=seq) for seq in self._sequence.spawn(n_children)]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"RandomStream(key={self.key})"


def as_stream(seed_or_stream: "int | RandomStream") -> RandomStream:
    """Accept either an integer seed or an existing stream."""
    if isinstance(seed_or_stream, RandomStream):
        return seed_or_stream
    return RandomStream(seed_or_stream)
