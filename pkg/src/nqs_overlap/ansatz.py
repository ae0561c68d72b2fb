"""Neural quantum state ansaetze behind a single amplitude interface.

Two families are provided:

* :class:`Rbm` -- a bias-free restricted Boltzmann machine with complex
  weights.  Unnormalized: amplitudes are ``prod_j 2*cosh(z_j)`` with
  hidden pre-activations ``z_j = sum_i W[j, i] * s_i``.
* :class:`Arnn` -- a stacked recurrent autoregressive network whose
  conditional probabilities come from per-site softmax heads, so the
  state is normalized exactly by construction and can be sampled without
  a Markov chain.

Everything works in the log domain: ``log_amplitude`` returns a complex
number whose real part is the log magnitude and whose imaginary part is
the phase.  A vanishing amplitude is represented by real part ``-inf``
(it is a value, not an error).
"""

from __future__ import annotations

import io
import math
from abc import ABC, abstractmethod

import numba
import numpy as np

from .configs import RandomStream, as_stream

TWO_PI = 2.0 * np.pi


def log_two_cosh(z: np.ndarray) -> np.ndarray:
    """Branch-continuous ``log(2*cosh(z))`` for complex ``z``.

    Evaluated as ``s*z + log(1 + exp(-2*s*z))`` with ``s = sign(Re z)``,
    which never overflows: the exponent always has a nonpositive real
    part.  The log-domain stability matters because amplitude ratios are
    exponentiated differences of these sums.
    """
    z = np.asarray(z, dtype=np.complex128)
    sign = np.where(z.real >= 0.0, 1.0, -1.0)
    sz = sign * z
    with np.errstate(divide="ignore", invalid="ignore"):
        return sz + np.log(1.0 + np.exp(-2.0 * sz))


def re_log_two_cosh(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Real part of ``log(2*cosh(x + i*y))`` without complex arithmetic.

    Uses ``|2 cosh(x+iy)|^2 = exp(2|x|) * ((1-u)^2 + 4*u*cos(y)^2)`` with
    ``u = exp(-2|x|)``; cheap enough for Metropolis inner loops.
    """
    ax = np.abs(x)
    u = np.exp(-2.0 * ax)
    cy = np.cos(y)
    with np.errstate(divide="ignore"):
        return ax + 0.5 * np.log((1.0 - u) ** 2 + 4.0 * u * cy * cy)


def wrap_angle(a: np.ndarray) -> np.ndarray:
    """Wrap angles into ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=np.float64), TWO_PI)


def elu(x: np.ndarray) -> np.ndarray:
    """Exponential linear unit with unit slope."""
    return np.where(x > 0.0, x, np.expm1(np.minimum(x, 0.0)))


def _elu_inplace(x: np.ndarray) -> np.ndarray:
    # hot path: exponentials only where the argument is negative
    negative = x < 0.0
    if negative.any():
        x[negative] = np.expm1(x[negative])
    return x


# -- fused autoregressive kernels ---------------------------------------------
#
# The recurrence below mirrors Arnn.step_batch exactly; the two paths are
# cross-checked by tests.  Keeping a register-resident per-row loop avoids
# materializing (batch, hidden) temporaries for every site and layer.


@numba.njit(cache=True, parallel=True, fastmath={'reassoc', 'contract'})
def _arnn_eval_kernel(
    a_stack, b_first, b_stack, c_stack, head_w, head_b, configs, log_prob, phase
):
    n_rows, n_sites = configs.shape
    depth, n_hidden = c_stack.shape
    two_pi = 2.0 * math.pi
    for r in numba.prange(n_rows):
        h_old = np.zeros((depth, n_hidden))
        h_new = np.empty((depth, n_hidden))
        lp = 0.0
        ph = 0.0
        for i in range(n_sites):
            for d in range(depth):
                for j in range(n_hidden):
                    acc = c_stack[d, j]
                    for k in range(n_hidden):
                        acc += a_stack[d, j, k] * h_old[d, k]
                    if d == 0:
                        if i > 0:
                            idx = 1 if configs[r, i - 1] > 0 else 0
                            acc += b_first[j, idx]
                    else:
                        for k in range(n_hidden):
                            acc += b_stack[d - 1, j, k] * h_new[d - 1, k]
                    h_new[d, j] = acc if acc > 0.0 else math.expm1(acc)
            for d in range(depth):
                for j in range(n_hidden):
                    h_old[d, j] = h_new[d, j]
            top = h_new[depth - 1]
            l0 = head_b[0]
            l1 = head_b[1]
            p0 = head_b[2]
            p1 = head_b[3]
            for k in range(n_hidden):
                l0 += head_w[0, k] * top[k]
                l1 += head_w[1, k] * top[k]
                p0 += head_w[2, k] * top[k]
                p1 += head_w[3, k] * top[k]
            m = l0 if l0 > l1 else l1
            lse = math.log(math.exp(l0 - m) + math.exp(l1 - m))
            if configs[r, i] > 0:
                lp += (l1 - m) - lse
                ph += math.pi - ((math.pi - p1) % two_pi)
            else:
                lp += (l0 - m) - lse
                ph += math.pi - ((math.pi - p0) % two_pi)
        log_prob[r] = lp
        phase[r] = ph


@numba.njit(cache=True, parallel=True, fastmath={'reassoc', 'contract'})
def _arnn_sample_kernel(
    a_stack, b_first, b_stack, c_stack, head_w, head_b, uniforms, spins, log_prob, phase
):
    n_sites, n_rows = uniforms.shape
    depth, n_hidden = c_stack.shape
    two_pi = 2.0 * math.pi
    for r in numba.prange(n_rows):
        h_old = np.zeros((depth, n_hidden))
        h_new = np.empty((depth, n_hidden))
        lp = 0.0
        ph = 0.0
        for i in range(n_sites):
            for d in range(depth):
                for j in range(n_hidden):
                    acc = c_stack[d, j]
                    for k in range(n_hidden):
                        acc += a_stack[d, j, k] * h_old[d, k]
                    if d == 0:
                        if i > 0:
                            idx = 1 if spins[r, i - 1] > 0 else 0
                            acc += b_first[j, idx]
                    else:
                        for k in range(n_hidden):
                            acc += b_stack[d - 1, j, k] * h_new[d - 1, k]
                    h_new[d, j] = acc if acc > 0.0 else math.expm1(acc)
            for d in range(depth):
                for j in range(n_hidden):
                    h_old[d, j] = h_new[d, j]
            top = h_new[depth - 1]
            l0 = head_b[0]
            l1 = head_b[1]
            p0 = head_b[2]
            p1 = head_b[3]
            for k in range(n_hidden):
                l0 += head_w[0, k] * top[k]
                l1 += head_w[1, k] * top[k]
                p0 += head_w[2, k] * top[k]
                p1 += head_w[3, k] * top[k]
            m = l0 if l0 > l1 else l1
            lse = math.log(math.exp(l0 - m) + math.exp(l1 - m))
            if uniforms[i, r] < math.exp((l1 - m) - lse):
                spins[r, i] = 1
                lp += (l1 - m) - lse
                ph += math.pi - ((math.pi - p1) % two_pi)
            else:
                spins[r, i] = -1
                lp += (l0 - m) - lse
                ph += math.pi - ((math.pi - p0) % two_pi)
        log_prob[r] = lp
        phase[r] = ph


class NeuralQuantumState(ABC):
    """Map spin configurations to complex log amplitudes.

    Implementations must be deterministic in (parameters, configuration)
    and immutable after construction, so instances are safe to share
    across threads for read-only evaluation.
    """

    n_sites: int

    @property
    @abstractmethod
    def is_normalized(self) -> bool:
        """True when ``sum_s |amplitude(s)|^2 == 1`` by construction."""

    @property
    @abstractmethod
    def parameters(self) -> np.ndarray:
        """Flat float64 view of all variational parameters (copy)."""

    @abstractmethod
    def with_parameters(self, values: np.ndarray) -> "NeuralQuantumState":
        """New instance of the same architecture with replaced parameters."""

    @abstractmethod
    def log_amplitude_batch(self, configs: np.ndarray) -> np.ndarray:
        """Complex log amplitudes for an ``(n, L)`` batch of +-1 configs."""

    def log_amplitude(self, config: np.ndarray) -> complex:
        """Scalar convenience wrapper around :meth:`log_amplitude_batch`."""
        return complex(self.log_amplitude_batch(np.asarray(config)[None, :])[0])

    def _check_batch(self, configs: np.ndarray) -> np.ndarray:
        configs = np.asarray(configs)
        if configs.ndim != 2 or configs.shape[1] != self.n_sites:
            raise ValueError(
                f"expected configurations of shape (n, {self.n_sites}), got {configs.shape}"
            )
        return configs


class Rbm(NeuralQuantumState):
    """Bias-free restricted Boltzmann machine with complex weights.

    ``log_amplitude(s) = sum_j log(2*cosh(sum_i W[j, i] * s_i))`` for a
    weight matrix ``W`` of shape (hidden units, sites).  There are no
    visible or hidden bias terms.  The flat parameter vector is
    ``[Re W (row major), Im W (row major)]``.
    """

    kind = "rbm"

    def __init__(self, weights: np.ndarray, *, seed: int | None = None):
        weights = np.asarray(weights, dtype=np.complex128)
        if weights.ndim != 2 or weights.shape[0] < 1 or weights.shape[1] < 1:
            raise ValueError(f"weights must be a (hidden, sites) matrix, got {weights.shape}")
        if not np.all(np.isfinite(weights.real)) or not np.all(np.isfinite(weights.imag)):
            raise ValueError("RBM weights must be finite")
        self._weights = weights.copy()
        self._weights.setflags(write=False)
        self.n_hidden, self.n_sites = weights.shape
        self.seed = seed

    @classmethod
    def random(cls, n_sites: int, seed_or_stream: int | RandomStream, n_hidden: int = 32) -> "Rbm":
        """Weights with real and imaginary parts uniform on [0, 0.01]."""
        stream = as_stream(seed_or_stream)
        gen = stream.generator
        real = gen.uniform(0.0, 0.01, size=(n_hidden, n_sites))
        imag = gen.uniform(0.0, 0.01, size=(n_hidden, n_sites))
        seed = stream.key[0] if len(stream.key) == 1 else None
        return cls(real + 1j * imag, seed=seed)

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def is_normalized(self) -> bool:
        return False

    @property
    def parameters(self) -> np.ndarray:
        return np.concatenate([self._weights.real.ravel(), self._weights.imag.ravel()])

    def with_parameters(self, values: np.ndarray) -> "Rbm":
        values = np.asarray(values, dtype=np.float64)
        count = 2 * self.n_hidden * self.n_sites
        if values.shape != (count,):
            raise ValueError(f"expected {count} parameters, got shape {values.shape}")
        half = count // 2
        shape = (self.n_hidden, self.n_sites)
        return Rbm(values[:half].reshape(shape) + 1j * values[half:].reshape(shape))

    def hidden_preactivations(self, configs: np.ndarray) -> np.ndarray:
        """``z = s @ W.T`` for a batch; exposed for incremental samplers."""
        configs = self._check_batch(configs)
        return configs.astype(np.float64) @ self._weights.T

    def log_amplitude_batch(self, configs: np.ndarray) -> np.ndarray:
        z = self.hidden_preactivations(configs)
        return log_two_cosh(z).sum(axis=1)


class Arnn(NeuralQuantumState):
    """Autoregressive recurrent network, normalized by construction.

    Sites are generated in index order.  At site ``i`` the input is the
    one-hot encoding of the previous spin (zeros for site 0), fed through
    ``depth`` stacked recurrent cells with ELU activations:

        h_d <- elu(h_d @ A_d.T + x @ B_d.T + c_d)

    where ``x`` is the layer input (one-hot for the first layer, the
    lower cell's fresh hidden state above it).  A linear head on the top
    hidden state emits 4 numbers: 2 logits whose softmax gives the
    conditional probabilities of (down, up), and 2 phase angles wrapped
    to ``(-pi, pi]``.  The amplitude of a full configuration is

        exp( 0.5 * sum_i log P(s_i | prefix) + i * sum_i phase_i(s_i) )

    so ``sum_s |amplitude(s)|^2 = 1`` exactly in exact arithmetic.
    Spin-to-index convention: down (-1) -> 0, up (+1) -> 1.
    """

    kind = "arnn"

    def __init__(
        self,
        n_sites: int,
        cell_weights: list[tuple[np.ndarray, np.ndarray, np.ndarray]],
        head_weights: tuple[np.ndarray, np.ndarray],
        *,
        seed: int | None = None,
    ):
        if n_sites < 1:
            raise ValueError("n_sites must be positive")
        if not cell_weights:
            raise ValueError("at least one recurrent layer is required")
        self.n_sites = int(n_sites)
        self.depth = len(cell_weights)
        self.n_hidden = cell_weights[0][0].shape[0]
        self.seed = seed

        cells = []
        in_dim = 2
        for d, (a, b, c) in enumerate(cell_weights):
            a = np.asarray(a, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            c = np.asarray(c, dtype=np.float64)
            h = self.n_hidden
            if a.shape != (h, h) or b.shape != (h, in_dim) or c.shape != (h,):
                raise ValueError(f"layer {d} weight shapes {a.shape}/{b.shape}/{c.shape} invalid")
            cells.append((a, b, c))
            in_dim = h
        head_w = np.asarray(head_weights[0], dtype=np.float64)
        head_b = np.asarray(head_weights[1], dtype=np.float64)
        if head_w.shape != (4, self.n_hidden) or head_b.shape != (4,):
            raise ValueError(f"head shapes {head_w.shape}/{head_b.shape} invalid")
        self._cells = cells
        self._head = (head_w, head_b)
        for arr in self._all_arrays():
            if not np.all(np.isfinite(arr)):
                raise ValueError("ARNN weights must be finite")
            arr.setflags(write=False)
        # contiguous transposes for the row-major batched recurrence
        self._cells_t = [
            (np.ascontiguousarray(a.T), np.ascontiguousarray(b.T), c) for a, b, c in cells
        ]
        self._head_t = np.ascontiguousarray(head_w.T)
        # stacked copies for the fused batch kernels
        self._a_stack = np.ascontiguousarray(np.stack([a for a, _, _ in cells]))
        self._b_first = np.ascontiguousarray(cells[0][1])
        if self.depth > 1:
            self._b_stack = np.ascontiguousarray(np.stack([b for _, b, _ in cells[1:]]))
        else:
            self._b_stack = np.zeros((0, self.n_hidden, self.n_hidden))
        self._c_stack = np.ascontiguousarray(np.stack([c for _, _, c in cells]))

    @classmethod
    def random(
        cls,
        n_sites: int,
        seed_or_stream: int | RandomStream,
        n_hidden: int = 16,
        depth: int = 4,
    ) -> "Arnn":
        """Entries uniform on [0, 1], rescaled by sqrt of mean fan.

        Each weight array is drawn from U[0, 1] and divided by
        ``sqrt((fan_in + fan_out) / 2)`` for that array; biases use the
        recurrent fan of their layer.
        """
        stream = as_stream(seed_or_stream)
        gen = stream.generator

        def draw(shape, fan_in, fan_out):
            scale = np.sqrt((fan_in + fan_out) / 2.0)
            return gen.uniform(0.0, 1.0, size=shape) / scale

        cells = []
        in_dim = 2
        for _ in range(depth):
            a = draw((n_hidden, n_hidden), n_hidden, n_hidden)
            b = draw((n_hidden, in_dim), in_dim, n_hidden)
            c = draw((n_hidden,), n_hidden, n_hidden)
            cells.append((a, b, c))
            in_dim = n_hidden
        head_w = draw((4, n_hidden), n_hidden, 4)
        head_b = draw((4,), n_hidden, 4)
        seed = stream.key[0] if len(stream.key) == 1 else None
        return cls(n_sites, cells, (head_w, head_b), seed=seed)

    def _all_arrays(self) -> list[np.ndarray]:
        arrays: list[np.ndarray] = []
        for a, b, c in self._cells:
            arrays.extend((a, b, c))
        arrays.extend(self._head)
        return arrays

    def parameter_layout(self) -> list[tuple[str, tuple[int, ...], float]]:
        """(name, shape, init scale divisor) for every weight array, in
        flat-vector order; lets tests check the init rule per layer."""
        layout = []
        in_dim = 2
        h = self.n_hidden
        for d in range(self.depth):
            layout.append((f"cell{d}.recurrent", (h, h), np.sqrt(h)))
            layout.append((f"cell{d}.input", (h, in_dim), np.sqrt((in_dim + h) / 2.0)))
            layout.append((f"cell{d}.bias", (h,), np.sqrt(h)))
            in_dim = h
        layout.append(("head.weight", (4, h), np.sqrt((h + 4) / 2.0)))
        layout.append(("head.bias", (4,), np.sqrt((h + 4) / 2.0)))
        return layout

    @property
    def cell_weights(self) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        return [(a, b, c) for a, b, c in self._cells]

    @property
    def head_weights(self) -> tuple[np.ndarray, np.ndarray]:
        return self._head

    @property
    def is_normalized(self) -> bool:
        return True

    @property
    def parameters(self) -> np.ndarray:
        return np.concatenate([arr.ravel() for arr in self._all_arrays()])

    def with_parameters(self, values: np.ndarray) -> "Arnn":
        values = np.asarray(values, dtype=np.float64)
        expected = sum(arr.size for arr in self._all_arrays())
        if values.shape != (expected,):
            raise ValueError(f"expected {expected} parameters, got shape {values.shape}")
        pieces = []
        offset = 0
        for arr in self._all_arrays():
            pieces.append(values[offset : offset + arr.size].reshape(arr.shape))
            offset += arr.size
        cells = [tuple(pieces[3 * d : 3 * d + 3]) for d in range(self.depth)]
        head = (pieces[-2], pieces[-1])
        return Arnn(self.n_sites, cells, head)

    # -- recurrent machinery ------------------------------------------------

    def initial_hidden(self, batch_size: int) -> list[np.ndarray]:
        """Fresh per-layer hidden states (zeros) for a batch."""
        return [np.zeros((batch_size, self.n_hidden)) for _ in range(self.depth)]

    @staticmethod
    def onehot(spins: np.ndarray) -> np.ndarray:
        """One-hot encode +-1 spins as (down, up) columns."""
        spins = np.asarray(spins)
        out = np.zeros((spins.shape[0], 2))
        up = spins > 0
        out[up, 1] = 1.0
        out[~up, 0] = 1.0
        return out

    def step_batch(
        self, hidden: list[np.ndarray], x: np.ndarray
    ) -> tuple[list[np.ndarray], np.ndarray, np.ndarray]:
        """Advance one site: returns (new hidden, log probs (n,2), phases (n,2)).

        ``x`` is the one-hot previous spin (zeros at site 0).  The same
        code path backs amplitude evaluation, conditionals, and exact
        sampling, so realized conditionals agree with prefix queries.
        """
        new_hidden = []
        for (a_t, b_t, c), h in zip(self._cells_t, hidden):
            pre = h @ a_t
            pre += x @ b_t
            pre += c
            x = _elu_inplace(pre)
            new_hidden.append(x)
        out = x @ self._head_t
        out += self._head[1]
        logits = out[:, :2]
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        phases = wrap_angle(out[:, 2:4])
        return new_hidden, log_probs, phases

    def conditionals(self, prefix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Conditional (probabilities, phases) over (down, up) for the site
        following ``prefix``; prefix length must be in [0, L)."""
        prefix = np.asarray(prefix)
        if prefix.ndim != 1 or prefix.size >= self.n_sites:
            raise ValueError(f"prefix of length {prefix.size} invalid for {self.n_sites} sites")
        hidden = self.initial_hidden(1)
        x = np.zeros((1, 2))
        log_probs = phases = None
        for i in range(prefix.size + 1):
            hidden, log_probs, phases = self.step_batch(hidden, x)
            if i < prefix.size:
                x = self.onehot(prefix[i : i + 1])
        return np.exp(log_probs[0]), phases[0]

    def log_amplitude_batch(self, configs: np.ndarray) -> np.ndarray:
        configs = np.ascontiguousarray(self._check_batch(configs), dtype=np.int8)
        n = configs.shape[0]
        log_prob = np.empty(n)
        phase = np.empty(n)
        _arnn_eval_kernel(
            self._a_stack,
            self._b_first,
            self._b_stack,
            self._c_stack,
            *self._head,
            configs,
            log_prob,
            phase,
        )
        return 0.5 * log_prob + 1j * phase

    def _log_amplitude_batch_reference(self, configs: np.ndarray) -> np.ndarray:
        """Plain numpy recurrence via step_batch; cross-checks the kernel."""
        configs = self._check_batch(configs)
        n = configs.shape[0]
        hidden = self.initial_hidden(n)
        x = np.zeros((n, 2))
        log_prob_sum = np.zeros(n)
        phase_sum = np.zeros(n)
        rows = np.arange(n)
        for i in range(self.n_sites):
            hidden, log_probs, phases = self.step_batch(hidden, x)
            chosen = (configs[:, i] > 0).astype(np.intp)
            log_prob_sum += log_probs[rows, chosen]
            phase_sum += phases[rows, chosen]
            if i + 1 < self.n_sites:
                x = self.onehot(configs[:, i])
        return 0.5 * log_prob_sum + 1j * phase_sum

    def sample_rows(self, uniforms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Draw one configuration per column of ``uniforms`` (shape (L, n)).

        Row ``i`` of ``uniforms`` supplies the site-``i`` decisions, which
        matches drawing one uniform vector per site in order.  Returns the
        spins and their complex log amplitudes.
        """
        if uniforms.shape[0] != self.n_sites:
            raise ValueError("uniform block must have one row per site")
        n = uniforms.shape[1]
        spins = np.empty((n, self.n_sites), dtype=np.int8)
        log_prob = np.empty(n)
        phase = np.empty(n)
        _arnn_sample_kernel(
            self._a_stack,
            self._b_first,
            self._b_stack,
            self._c_stack,
            *self._head,
            np.ascontiguousarray(uniforms),
            spins,
            log_prob,
            phase,
        )
        return spins, 0.5 * log_prob + 1j * phase


class ScaledAnsatz(NeuralQuantumState):
    """Wrap any state with a constant complex log offset.

    Every amplitude is multiplied by ``exp(log_offset)``; used to verify
    that estimators are invariant under global rescaling.  The wrapped
    state samples from the same distribution as its base (the constant
    cancels in probability ratios).
    """

    def __init__(self, base: NeuralQuantumState, log_offset: complex):
        self.base = base
        self.log_offset = complex(log_offset)
        self.n_sites = base.n_sites

    @property
    def is_normalized(self) -> bool:
        return self.base.is_normalized and self.log_offset.real == 0.0

    @property
    def parameters(self) -> np.ndarray:
        return self.base.parameters

    def with_parameters(self, values: np.ndarray) -> "ScaledAnsatz":
        return ScaledAnsatz(self.base.with_parameters(values), self.log_offset)

    def log_amplitude_batch(self, configs: np.ndarray) -> np.ndarray:
        return self.base.log_amplitude_batch(configs) + self.log_offset


def random_ansatz(
    kind: str, n_sites: int, seed_or_stream: int | RandomStream, **architecture
) -> NeuralQuantumState:
    """Seeded random state of the requested family ('rbm' or 'arnn')."""
    if kind == "rbm":
        return Rbm.random(n_sites, seed_or_stream, **architecture)
    if kind == "arnn":
        return Arnn.random(n_sites, seed_or_stream, **architecture)
    raise ValueError(f"unknown ansatz kind {kind!r}")


def random_direction(n_parameters: int, seed_or_stream: int | RandomStream) -> np.ndarray:
    """Seeded uniform random unit vector in parameter space."""
    gen = as_stream(seed_or_stream).generator
    v = gen.standard_normal(n_parameters)
    return v / np.linalg.norm(v)


def perturb(
    ansatz: NeuralQuantumState, direction: np.ndarray, magnitude: float
) -> NeuralQuantumState:
    """Shift parameters by ``magnitude * direction``.

    ``magnitude == 0`` returns the input object itself, so the identity
    case is exact by construction.
    """
    direction = np.asarray(direction, dtype=np.float64)
    params = ansatz.parameters
    if direction.shape != params.shape:
        raise ValueError(f"direction shape {direction.shape} != parameter shape {params.shape}")
    if magnitude == 0.0:
        return ansatz
    return ansatz.with_parameters(params + magnitude * direction)


# -- serialization -----------------------------------------------------------

_MAGIC = "nqs-ansatz 1"


def save_ansatz(ansatz: NeuralQuantumState, path: str) -> None:
    """Write a plain-text architecture header plus a little-endian blob."""
    if isinstance(ansatz, Rbm):
        fields = {"kind": "rbm", "sites": ansatz.n_sites, "hidden": ansatz.n_hidden, "depth": 0}
    elif isinstance(ansatz, Arnn):
        fields = {
            "kind": "arnn",
            "sites": ansatz.n_sites,
            "hidden": ansatz.n_hidden,
            "depth": ansatz.depth,
        }
    else:
        raise ValueError(f"cannot serialize ansatz of type {type(ansatz).__name__}")
    params = ansatz.parameters
    fields["seed"] = -1 if getattr(ansatz, "seed", None) is None else int(ansatz.seed)
    fields["count"] = params.size
    header = _MAGIC + "\n" + "".join(f"{k}={v}\n" for k, v in fields.items()) + "---\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(params.astype("<f8").tobytes())


def load_ansatz(path: str) -> NeuralQuantumState:
    """Inverse of :func:`save_ansatz`; parameters round-trip bitwise."""
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)
    magic = buf.readline().decode("ascii").strip()
    if magic != _MAGIC:
        raise ValueError(f"{path}: not an ansatz file (bad magic {magic!r})")
    fields: dict[str, str] = {}
    while True:
        line = buf.readline().decode("ascii").strip()
        if line == "---":
            break
        if not line:
            raise ValueError(f"{path}: truncated header")
        key, _, value = line.partition("=")
        fields[key] = value
    params = np.frombuffer(buf.read(), dtype="<f8").astype(np.float64)
    count = int(fields["count"])
    if params.size != count:
        raise ValueError(f"{path}: expected {count} parameters, found {params.size}")
    kind = fields["kind"]
    sites = int(fields["sites"])
    hidden = int(fields["hidden"])
    seed = int(fields["seed"])
    if kind == "rbm":
        template = Rbm(np.zeros((hidden, sites), dtype=np.complex128))
    elif kind == "arnn":
        template = Arnn.random(sites, 0, n_hidden=hidden, depth=int(fields["depth"]))
    else:
        raise ValueError(f"{path}: unknown ansatz kind {kind!r}")
    loaded = template.with_parameters(params)
    loaded.seed = None if seed == -1 else seed
    return loaded
