"""Deterministic randomness for graph generation and trials.

All randomness in the package flows through a counter-based splittable
construction: a 64-bit mix of ``(seed, channel, node, counter)`` yields one
uniform value.  A node's logical stream is the counter sequence under its own
``(seed, channel, node)`` key, so values depend only on the key and never on
execution order.  Regenerating with the same seed and parameters therefore
produces bit-identical output at any worker count.

Channels separate independent uses of a node's randomness (role assignment
vs. edge drawing vs. trial pair sampling).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import ParameterError

__all__ = [
    "Channel",
    "RngStream",
    "uniforms",
    "sample_popularity",
    "popularity_cdf",
    "connection_count",
    "connection_counts",
    "sample_inverse_square_target",
    "TorusRingSampler",
    "ExplicitWeightSampler",
    "torus_ring_table",
]


class Channel(IntEnum):
    """Independent randomness channels per node."""

    ROLE = 0      # popularity draw / highway membership
    EDGES = 1     # connection counts and long-range target draws
    TRIALS = 2    # source/target pair sampling
    NETWORK = 3   # synthetic road-network construction
    EXTRA = 4     # auxiliary draws (RH variant local links)
    DERIVE = 5    # derived child seeds (sweep points, graph seeds)


_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; mutates and returns z
    z ^= z >> _S30
    z *= _M1
    z ^= z >> _S27
    z *= _M2
    z ^= z >> _S31
    return z


def hash_u64(seed: int, channel: int, node, counter) -> np.ndarray:
    """Mix ``(seed, channel, node, counter)`` into uniform 64-bit words.

    ``node`` and ``counter`` broadcast against each other; the result has
    their broadcast shape.
    """
    with np.errstate(over="ignore"):
        node = np.asarray(node, dtype=np.uint64)
        counter = np.asarray(counter, dtype=np.uint64)
        base = _mix(np.uint64(seed % (1 << 64)) + _GAMMA * np.uint64(1 + channel))
        z = node * _M2
        z = z + _GAMMA
        z = z ^ base
        _mix(z)
        z = z ^ (counter * _GAMMA + _M1)
        return _mix(z)


def uniforms(seed: int, channel: int, node, counter) -> np.ndarray:
    """Uniform float64 values in [0, 1) with 53-bit resolution."""
    return (hash_u64(seed, channel, node, counter) >> _S11) * (2.0 ** -53)


def derive_seed(base: int, a: int, b: int = 0) -> int:
    """Deterministic child seed for sweep points and per-point graphs."""
    return int(hash_u64(base, Channel.DERIVE, a, b))


@dataclass
class RngStream:
    """A stateful cursor over one node's counter sequence.

    Two streams constructed with the same ``(seed, node)`` produce identical
    sequences; streams for distinct nodes are independent by construction.
    """

    seed: int
    node: int = 0
    channel: int = Channel.EDGES
    _counter: int = field(default=0, repr=False)

    def uniform(self) -> float:
        """Next uniform value in [0, 1)."""
        u = float(uniforms(self.seed, self.channel, self.node, self._counter))
        self._counter += 1
        return u

    def uniform_array(self, size: int) -> np.ndarray:
        """Next ``size`` uniform values."""
        u = uniforms(self.seed, self.channel, self.node,
                     self._counter + np.arange(size))
        self._counter += size
        return u


def sample_popularity(stream: RngStream, eps: float) -> float:
    """Draw one popularity value from the power-law density
    ``(1 + eps) * k^-(2+eps)`` on ``k >= 1``.

    Inverse-CDF form: ``U^(-1/(1+eps))`` for ``U`` uniform on (0, 1], so the
    tail satisfies ``Pr(K >= x) = x^-(1+eps)``.
    """
    if not eps > 0:
        raise ParameterError(f"popularity exponent offset must be > 0, got {eps}")
    u = 1.0 - stream.uniform()  # (0, 1]
    return u ** (-1.0 / (1.0 + eps))


def sample_popularities(seed: int, nodes: np.ndarray, eps: float,
                        counter: int = 0) -> np.ndarray:
    """Vectorized popularity draw for many nodes (ROLE channel, one value each)."""
    if not eps > 0:
        raise ParameterError(f"popularity exponent offset must be > 0, got {eps}")
    u = 1.0 - uniforms(seed, Channel.ROLE, nodes, counter)
    return u ** (-1.0 / (1.0 + eps))


def popularity_cdf(x, eps: float):
    """Analytic CDF of the popularity law: ``1 - x^-(1+eps)`` for x >= 1."""
    x = np.asarray(x, dtype=float)
    return np.where(x < 1.0, 0.0, 1.0 - x ** -(1.0 + eps))


def connection_count(rate: float, stream: RngStream) -> int:
    """Integerize a fractional connection rate by stochastic rounding.

    Returns ``floor(rate)`` plus a Bernoulli(frac(rate)) increment, so the
    expectation equals ``rate`` exactly.  Integer rates consume no randomness.
    """
    if not rate >= 0:
        raise ParameterError(f"connection rate must be >= 0, got {rate}")
    base = int(np.floor(rate))
    frac = rate - base
    if frac <= 0:
        return base
    return base + (1 if stream.uniform() < frac else 0)


def connection_counts(rates: np.ndarray, seed: int, nodes: np.ndarray,
                      counter: int = 0) -> np.ndarray:
    """Vectorized stochastic rounding (EDGES channel, counter 0 by default)."""
    rates = np.asarray(rates, dtype=float)
    if np.any(rates < 0):
        raise ParameterError("connection rates must be >= 0")
    base = np.floor(rates)
    frac = rates - base
    out = base.astype(np.int64)
    has_frac = frac > 0
    if np.any(has_frac):
        u = uniforms(seed, Channel.EDGES, nodes, counter)
        out += (has_frac & (u < frac)).astype(np.int64)
    return out


# ---------------------------------------------------------------------------
# Inverse-square (generally inverse-power) target samplers.
# ---------------------------------------------------------------------------

_ring_cache: dict[tuple[int, float], tuple] = {}
_ring_lock = threading.Lock()


def torus_ring_table(n: int, exponent: float = 2.0):
    """Shared ring table for an ``n x n`` torus: all nonzero offsets sorted by
    lattice distance, with per-ring slices and cumulative ring weights
    ``|S_j| * j^-exponent``.

    Translation invariance of the torus makes one table serve every source
    node.  Tables are immutable once built and cached per ``(n, exponent)``.
    """
    key = (n, exponent)
    tab = _ring_cache.get(key)
    if tab is not None:
        return tab
    with _ring_lock:
        tab = _ring_cache.get(key)
        if tab is not None:
            return tab
        a = np.arange(n)
        da = np.minimum(a, n - a)
        dist = (da[:, None] + da[None, :]).ravel()
        order = np.argsort(dist, kind="stable")[1:]  # drop the zero offset
        ring_of = dist[order]
        max_d = int(ring_of[-1]) if len(ring_of) else 0
        sizes = np.bincount(ring_of, minlength=max_d + 1)[1:]
        starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
        radii = np.arange(1, max_d + 1, dtype=float)
        weights = sizes * radii ** -exponent
        total = float(weights.sum())
        cum = np.cumsum(weights)
        cum /= cum[-1]
        tab = (order.astype(np.int64), starts, sizes.astype(np.int64), cum, total)
        _ring_cache[key] = tab
        return tab


class TorusRingSampler:
    """Inverse-power long-range sampling over all nodes of a torus.

    Draws an offset ring ``j`` with probability proportional to
    ``|S_j| * j^-exponent`` then a uniform member of the ring, which realizes
    ``Pr(v) ∝ d(u, v)^-exponent`` over every ``v != u`` in O(1) per draw.
    """

    def __init__(self, n: int, exponent: float = 2.0):
        self.n = n
        self.exponent = exponent
        (self._offsets, self._starts, self._sizes,
         self._cum, self.normalization) = torus_ring_table(n, exponent)

    def sample_offsets(self, u1: np.ndarray, u2: np.ndarray):
        """Map pairs of uniforms to offset coordinates ``(da, db)``."""
        ring = np.searchsorted(self._cum, u1, side="right")
        ring = np.minimum(ring, len(self._sizes) - 1)
        slot = np.minimum((u2 * self._sizes[ring]).astype(np.int64),
                          self._sizes[ring] - 1)
        off = self._offsets[self._starts[ring] + slot]
        return off // self.n, off % self.n

    def sample_targets(self, src: np.ndarray, u1: np.ndarray, u2: np.ndarray):
        """Targets for source node ids ``src`` (ids are ``x * n + y``)."""
        da, db = self.sample_offsets(u1, u2)
        n = self.n
        return ((src // n + da) % n) * n + (src % n + db) % n


class ExplicitWeightSampler:
    """Prefix-sum sampling over an explicit candidate set.

    Used wherever translation invariance does not hold: restricted highway
    subsets, popularity windows, and road metrics.
    """

    def __init__(self, candidates: np.ndarray, weights: np.ndarray):
        if len(candidates) == 0:
            raise ParameterError("candidate set must be nonempty")
        if len(candidates) != len(weights):
            raise ParameterError("candidates and weights must align")
        self.candidates = np.asarray(candidates)
        cum = np.cumsum(np.asarray(weights, dtype=float))
        self.normalization = float(cum[-1])
        if not self.normalization > 0:
            raise ParameterError("total candidate weight must be positive")
        self._cum = cum

    def sample(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in [0, 1) to candidate ids."""
        idx = np.searchsorted(self._cum, np.asarray(u) * self.normalization,
                              side="right")
        return self.candidates[np.minimum(idx, len(self.candidates) - 1)]


def sample_inverse_square_target(u: int, candidates: np.ndarray, metric,
                                 stream: RngStream, exponent: float = 2.0):
    """Draw one long-range target for ``u`` with ``Pr(v) ∝ d(u, v)^-exponent``
    over the given candidate set (``u`` itself is excluded).

    Returns ``None`` when no eligible candidate exists; the caller decides how
    to proceed (e.g. a highway node with no peers emits no edge).
    """
    candidates = np.asarray(candidates)
    candidates = candidates[candidates != u]
    if len(candidates) == 0:
        return None
    d = metric.distances_from(u, candidates).astype(float)
    sampler = ExplicitWeightSampler(candidates, d ** -exponent)
    return int(sampler.sample(np.array([stream.uniform()]))[0])
