"""Configuration sampling from Born distributions ``|amp(s)|^2 / N``.

Autoregressive states are sampled exactly (independent draws, site by
site).  Everything else goes through Metropolis-Hastings with single-site
flip proposals, ``L`` proposals per sweep, one recorded configuration per
sweep after a burn-in of 25 sweeps (the benchmark defaults).

Chains are embarrassingly parallel.  Every chain owns three substreams of
its :class:`~nqs_overlap.configs.RandomStream` (initial state, proposal
sites, acceptance draws), so an ensemble of chains is reproducible and
identical to running the chains one by one on the same substreams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .ansatz import NeuralQuantumState, Rbm, ScaledAnsatz, re_log_two_cosh
from .configs import RandomStream, random_configuration

#: Sweeps processed per kernel invocation; bounds the size of the
#: pre-drawn random blocks without affecting the drawn sequences.
_SWEEP_CHUNK = 1024

#: Batch rows processed per pass of the exact sampler.
_EXACT_CHUNK = 1 << 18


@dataclass(frozen=True)
class ChainSettings:
    """Metropolis chain knobs; the defaults match the benchmark protocol
    (one proposal per site per sweep, 25 burn-in sweeps, no thinning)."""

    steps_per_sweep: int | None = None
    burn_in_sweeps: int = 25

    def resolved_steps(self, n_sites: int) -> int:
        steps = self.steps_per_sweep if self.steps_per_sweep is not None else n_sites
        if steps < 1:
            raise ValueError("steps_per_sweep must be >= 1")
        return steps

    def __post_init__(self):
        if self.burn_in_sweeps < 0:
            raise ValueError("burn_in_sweeps must be >= 0")


@dataclass
class SampleBatch:
    """A batch of configurations plus provenance.

    ``acceptance_rate`` is accepted/total proposals over the whole chain
    run, burn-in included (exact bookkeeping, only set for Markov
    chains).  ``log_amplitudes``, when present, holds the generating
    state's own log amplitudes at the drawn configurations; the exact
    sampler fills it for free.
    """

    configurations: np.ndarray
    provenance: str
    acceptance_rate: float | None = None
    log_amplitudes: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.configurations = np.asarray(self.configurations, dtype=np.int8)
        if self.configurations.ndim != 2 or self.configurations.shape[0] == 0:
            raise ValueError("a sample batch must be a nonempty (n, L) array")
        if self.provenance not in ("exact", "markov-chain"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.acceptance_rate is not None and not 0.0 <= self.acceptance_rate <= 1.0:
            raise ValueError("acceptance rate outside [0, 1]")

    @property
    def n_samples(self) -> int:
        return self.configurations.shape[0]

    @property
    def n_sites(self) -> int:
        return self.configurations.shape[1]


def _sampling_view(ansatz: NeuralQuantumState) -> tuple[NeuralQuantumState, complex]:
    """Strip scale wrappers: a constant log offset cancels in probability
    ratios, so chains can run on the bare state.  Returns the accumulated
    offset so exact amplitudes can be restored."""
    offset = 0.0 + 0.0j
    while isinstance(ansatz, ScaledAnsatz):
        offset += ansatz.log_offset
        ansatz = ansatz.base
    return ansatz, offset


# -- exact autoregressive sampling -------------------------------------------


def sample_exact_autoregressive(
    ansatz: NeuralQuantumState, n_samples: int, stream: RandomStream
) -> SampleBatch:
    """Draw ``n_samples`` independent configurations from a normalized
    autoregressive state, site by site from its conditionals."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if not ansatz.is_normalized:
        raise ValueError("exact autoregressive sampling requires a normalized state")
    target, offset = _sampling_view(ansatz)
    if not hasattr(target, "step_batch"):
        raise ValueError(f"{type(target).__name__} does not expose autoregressive conditionals")

    gen = stream.generator
    n_sites = target.n_sites
    configs = np.empty((n_samples, n_sites), dtype=np.int8)
    amps = np.empty(n_samples, dtype=np.complex128)
    fused = hasattr(target, "sample_rows")
    for start in range(0, n_samples, _EXACT_CHUNK):
        stop = min(start + _EXACT_CHUNK, n_samples)
        block = stop - start
        if fused:
            # one uniform row per site, same draw order as the site loop
            spins, log_amps = target.sample_rows(gen.random((n_sites, block)))
        else:
            hidden = target.initial_hidden(block)
            x = np.zeros((block, 2))
            log_prob = np.zeros(block)
            phase = np.zeros(block)
            rows = np.arange(block)
            spins = np.empty((block, n_sites), dtype=np.int8)
            for i in range(n_sites):
                hidden, log_probs, phases = target.step_batch(hidden, x)
                up = gen.random(block) < np.exp(log_probs[:, 1])
                spins[:, i] = np.where(up, 1, -1)
                chosen = up.astype(np.intp)
                log_prob += log_probs[rows, chosen]
                phase += phases[rows, chosen]
                if i + 1 < n_sites:
                    x = target.onehot(spins[:, i])
            log_amps = 0.5 * log_prob + 1j * phase
        configs[start:stop] = spins
        amps[start:stop] = log_amps + offset
    return SampleBatch(configs, "exact", log_amplitudes=amps)


# -- Metropolis-Hastings ------------------------------------------------------


def flip_acceptance(ansatz: NeuralQuantumState, config: np.ndarray, site: int) -> float:
    """Acceptance probability ``min(1, |amp(s')/amp(s)|^2)`` of a single
    site flip; exposed so detailed balance can be checked directly."""
    config = np.asarray(config, dtype=np.int8)
    flipped = config.copy()
    flipped[site] = -flipped[site]
    both = np.stack([config, flipped])
    log_re = ansatz.log_amplitude_batch(both).real
    delta = log_re[1] - log_re[0]
    if np.isnan(delta):
        raise ValueError("flip ratio undefined: both amplitudes vanish")
    return float(np.exp(min(0.0, 2.0 * delta)))


def sample_metropolis(
    ansatz: NeuralQuantumState,
    n_samples: int,
    stream: RandomStream,
    settings: ChainSettings | None = None,
) -> SampleBatch:
    """Run a single Metropolis chain on ``stream``.

    Equivalent to chain ``c`` of an ensemble when called on the
    ensemble's substream ``c``.
    """
    return _run_chain_set(ansatz, n_samples, [stream], settings)[0]


def sample_metropolis_chains(
    ansatz: NeuralQuantumState,
    n_samples_per_chain: int,
    n_chains: int,
    stream: RandomStream,
    settings: ChainSettings | None = None,
) -> list[SampleBatch]:
    """Run ``n_chains`` independent Metropolis chains.

    Chain ``c`` consumes substream ``c`` of ``stream``; results are a
    pure function of (parameters, settings, seed) and do not depend on
    how many chains share one call.
    """
    if n_chains < 1:
        raise ValueError("n_chains must be >= 1")
    return _run_chain_set(ansatz, n_samples_per_chain, stream.split(n_chains), settings)


def _run_chain_set(
    ansatz: NeuralQuantumState,
    n_samples_per_chain: int,
    chain_streams: list[RandomStream],
    settings: ChainSettings | None,
) -> list[SampleBatch]:
    if n_samples_per_chain < 1:
        raise ValueError("n_samples_per_chain must be >= 1")
    settings = settings or ChainSettings()
    target, _ = _sampling_view(ansatz)
    n_sites = target.n_sites
    steps = settings.resolved_steps(n_sites)
    n_chains = len(chain_streams)

    site_gens = []
    accept_gens = []
    states = np.empty((n_chains, n_sites), dtype=np.int8)
    for c, chain_stream in enumerate(chain_streams):
        init, sites, accept = chain_stream.split(3)
        site_gens.append(sites.generator)
        accept_gens.append(accept.generator)
        gen = init.generator
        state = random_configuration(n_sites, gen)
        # a zero-amplitude start would poison the ratio; redraw
        while target.log_amplitude_batch(state[None, :]).real[0] == -np.inf:
            state = random_configuration(n_sites, gen)
        states[c] = state

    total_sweeps = settings.burn_in_sweeps + n_samples_per_chain
    if isinstance(target, Rbm):
        records, accepts = _run_rbm_chains(
            target, states, site_gens, accept_gens, total_sweeps, steps
        )
    else:
        records, accepts = _run_generic_chains(
            target, states, site_gens, accept_gens, total_sweeps, steps
        )

    total_steps = total_sweeps * steps
    kept = records[:, settings.burn_in_sweeps :, :]
    return [
        SampleBatch(kept[c].copy(), "markov-chain", acceptance_rate=accepts[c] / total_steps)
        for c in range(n_chains)
    ]


def _draw_proposals(site_gens, accept_gens, n_sites, n_steps):
    """Per-chain proposal sites and acceptance draws for one chunk."""
    sites = np.stack([g.integers(0, n_sites, size=n_steps) for g in site_gens])
    unif = np.stack([g.random(n_steps) for g in accept_gens])
    return sites, unif


def _run_rbm_chains(rbm, states, site_gens, accept_gens, total_sweeps, steps):
    """Incremental-update kernel path: hidden pre-activations are cached
    per chain and refreshed in O(hidden) per proposal."""
    n_chains, n_sites = states.shape
    z = rbm.hidden_preactivations(states)
    zr = np.ascontiguousarray(z.real)
    zi = np.ascontiguousarray(z.imag)
    relog = re_log_two_cosh(zr, zi).sum(axis=1)
    wr = np.ascontiguousarray(rbm.weights.real)
    wi = np.ascontiguousarray(rbm.weights.imag)

    records = np.empty((n_chains, total_sweeps, n_sites), dtype=np.int8)
    accepts = np.zeros(n_chains, dtype=np.int64)
    done = 0
    while done < total_sweeps:
        sweeps = min(_SWEEP_CHUNK, total_sweeps - done)
        sites, unif = _draw_proposals(site_gens, accept_gens, n_sites, sweeps * steps)
        _rbm_sweep_kernel(
            wr, wi, states, zr, zi, relog, sites, unif, steps, records[:, done : done + sweeps, :], accepts
        )
        done += sweeps
    return records, accepts


@numba.njit(cache=True, parallel=True, fastmath={'reassoc', 'contract'})
def _rbm_sweep_kernel(wr, wi, states, zr, zi, relog, sites, unif, steps_per_sweep, record, accepts):
    n_chains, n_steps = sites.shape
    m_hidden = wr.shape[0]
    n_sweeps = n_steps // steps_per_sweep
    for c in numba.prange(n_chains):
        trial_r = np.empty(m_hidden)
        trial_i = np.empty(m_hidden)
        step = 0
        for sweep in range(n_sweeps):
            for _ in range(steps_per_sweep):
                k = sites[c, step]
                s = float(states[c, k])
                new_sum = 0.0
                for j in range(m_hidden):
                    x = zr[c, j] - 2.0 * s * wr[j, k]
                    y = zi[c, j] - 2.0 * s * wi[j, k]
                    trial_r[j] = x
                    trial_i[j] = y
                    ax = abs(x)
                    u = math.exp(-2.0 * ax)
                    cy = math.cos(y)
                    new_sum += ax + 0.5 * math.log((1.0 - u) ** 2 + 4.0 * u * cy * cy)
                diff = new_sum - relog[c]
                if diff >= 0.0 or unif[c, step] < math.exp(2.0 * diff):
                    states[c, k] = -states[c, k]
                    for j in range(m_hidden):
                        zr[c, j] = trial_r[j]
                        zi[c, j] = trial_i[j]
                    relog[c] = new_sum
                    accepts[c] += 1
                step += 1
            for i in range(states.shape[1]):
                record[c, sweep, i] = states[c, i]


def _run_generic_chains(target, states, site_gens, accept_gens, total_sweeps, steps):
    """Fallback for arbitrary states: chains advance in lockstep with one
    batched amplitude evaluation per proposal step."""
    n_chains, n_sites = states.shape
    log_re = target.log_amplitude_batch(states).real
    records = np.empty((n_chains, total_sweeps, n_sites), dtype=np.int8)
    accepts = np.zeros(n_chains, dtype=np.int64)
    rows = np.arange(n_chains)
    done = 0
    while done < total_sweeps:
        sweeps = min(_SWEEP_CHUNK, total_sweeps - done)
        sites, unif = _draw_proposals(site_gens, accept_gens, n_sites, sweeps * steps)
        for local in range(sweeps * steps):
            k = sites[:, local]
            proposal = states.copy()
            proposal[rows, k] = -proposal[rows, k]
            prop_re = target.log_amplitude_batch(proposal).real
            with np.errstate(invalid="ignore"):
                accept = unif[:, local] < np.exp(np.minimum(0.0, 2.0 * (prop_re - log_re)))
            states = np.where(accept[:, None], proposal, states)
            log_re = np.where(accept, prop_re, log_re)
            accepts += accept
            if (local + 1) % steps == 0:
                records[:, done + local // steps, :] = states
        done += sweeps
    return records, accepts
