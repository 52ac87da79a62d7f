"""Graph model generators: Kleinberg baseline, Kleinberg Highway (KH),
Randomized Highway (RH), and Windowed Neighborhood Preferential Attachment
(WNPA), over grid or road metrics.

Every model combines implicit local connections (all nodes within lattice
distance ``p``, or the road edges themselves) with directed long-range
connections drawn with probability proportional to ``d(u, v)^-r`` from a
model-specific candidate set:

* Kleinberg: every node draws ``q`` targets among all other nodes.
* KH: highway nodes sit on an evenly spaced subgrid (coordinates divisible by
  ``sqrt(k)``); each draws ``Q * k`` targets among highway nodes and also has
  implicit local edges to its four highway-grid neighbors.
* RH: each node is highway with probability ``1/k``; highway nodes draw
  ``Q * k`` targets among highway nodes (no highway-local edges).
* WNPA: each node draws a power-law popularity ``k_u`` and then targets
  restricted to the popularity window ``[k_u / A, A * k_u]``.

Generation is deterministic given ``(params, seed)`` at any worker count:
all randomness is keyed by ``(seed, channel, node, counter)``.  Repeated
draws of the same target are kept as parallel edges so that the expected
out-degree of a node equals its connection rate exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import GenerationError, ParameterError
from .metric import GridMetric, GridTopology, MetricHandle
from .sampling import (
    Channel,
    ExplicitWeightSampler,
    TorusRingSampler,
    connection_counts,
    sample_popularities,
    uniforms,
)

__all__ = [
    "ModelParams",
    "GraphInstance",
    "generate",
    "generate_kleinberg",
    "generate_kh",
    "generate_rh",
    "generate_wnpa",
    "generate_on_metric",
]

log = logging.getLogger(__name__)

MODELS = ("kleinberg", "kh", "rh", "wnpa")

# candidate-set size below which restricted sampling uses explicit
# prefix-sum tables instead of rejection against the full-torus sampler
_EXPLICIT_MAX = 4096


@dataclass(frozen=True)
class ModelParams:
    """Parameter record shared by all generators.

    ``q`` is the average long-range degree (the Kleinberg per-node rate; the
    graph-wide average ``Q`` for KH/RH/WNPA).  ``k`` is the highway parameter
    of KH/RH, ``eps``/``A`` the WNPA popularity exponent offset and window
    factor.
    """

    model: str
    n: int
    p: int = 1
    q: float = 1.0
    r: float = 2.0
    k: Optional[int] = None
    eps: Optional[float] = None
    A: Optional[float] = None
    rh_local_variant: bool = False
    directed: bool = True
    wraparound: bool = True
    topology: str = "grid"
    window_weighting: str = "inverse_square"

    def validated(self) -> "ModelParams":
        if self.model not in MODELS:
            raise ParameterError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.n < 1:
            raise ParameterError(f"grid side n must be >= 1, got {self.n}")
        if self.p < 1:
            raise ParameterError(f"local radius p must be >= 1, got {self.p}")
        if self.q < 0:
            raise ParameterError(f"average degree q must be >= 0, got {self.q}")
        if self.r <= 0:
            raise ParameterError(f"clustering exponent r must be > 0, got {self.r}")
        if self.model == "kh":
            if self.k is None or self.k < 1 or self.k > self.n ** 2:
                raise ParameterError(f"KH requires 1 <= k <= n^2, got k={self.k}")
            s = math.isqrt(self.k)
            if s * s != self.k:
                raise ParameterError(
                    f"KH requires square k (sqrt(k) integer); got k={self.k}. "
                    f"Nearest squares: {s * s} and {(s + 1) ** 2}.")
            if self.n % s != 0:
                raise ParameterError(
                    f"KH requires sqrt(k) | n; got n={self.n}, sqrt(k)={s}. "
                    f"Pick n a multiple of {s} or a k whose root divides {self.n}.")
        if self.model == "rh":
            if self.n < 2:
                raise ParameterError("RH requires n >= 2")
            cap = self.n ** 2 / math.log2(self.n)
            if self.k is None or self.k < 1 or self.k > cap:
                raise ParameterError(
                    f"RH requires 1 <= k <= n^2/log2(n) = {cap:.0f}, got k={self.k}")
            if self.k > cap / 2:
                log.warning("RH k=%d is close to the n^2/log2(n) cap; degree "
                            "concentration degrades in this regime", self.k)
        if self.model == "wnpa":
            if self.eps is None or not self.eps > 0:
                raise ParameterError(f"WNPA requires eps > 0, got {self.eps}")
            if self.A is None or not self.A >= 1:
                raise ParameterError(f"WNPA requires A >= 1, got {self.A}")
            if not self.q > 0:
                raise ParameterError(f"WNPA requires Q > 0, got {self.q}")
            if self.window_weighting not in ("inverse_square", "uniform"):
                raise ParameterError(
                    f"unknown window weighting {self.window_weighting!r}")
        return self

    @property
    def highway_spacing(self) -> int:
        if self.model != "kh" or self.k is None:
            raise ParameterError("highway_spacing is defined for KH only")
        return math.isqrt(self.k)


@dataclass
class GraphInstance:
    """A generated model instance.

    Local edges are implicit (every node reaches all of ``B_p(u)``; KH
    highway nodes additionally reach their four highway-grid neighbors; road
    nodes reach their road neighbors).  Long-range edges are stored as a
    directed CSR; parallel edges may occur and carry no extra meaning for
    routing.
    """

    params: ModelParams
    seed: int
    metric: MetricHandle
    is_highway: np.ndarray
    popularity: np.ndarray
    indptr: np.ndarray
    targets: np.ndarray
    highway_spacing: Optional[int] = None
    empty_window_count: int = 0
    component_restricted: int = 0
    _routing_indptr: np.ndarray = field(default=None, repr=False)
    _routing_targets: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.params.directed:
            self._routing_indptr = self.indptr
            self._routing_targets = self.targets
        else:
            # undirected flag: long-range edges usable in both directions
            src = np.repeat(np.arange(self.num_nodes), np.diff(self.indptr))
            allsrc = np.concatenate([src, self.targets])
            alldst = np.concatenate([self.targets, src])
            order = np.argsort(allsrc, kind="stable")
            counts = np.bincount(allsrc, minlength=self.num_nodes)
            self._routing_indptr = np.concatenate(
                [[0], np.cumsum(counts)]).astype(np.int64)
            self._routing_targets = alldst[order]

    @property
    def num_nodes(self) -> int:
        return self.metric.num_nodes

    @property
    def edge_count(self) -> int:
        return int(self.indptr[-1])

    def out_targets(self, u: int) -> np.ndarray:
        """Long-range targets drawn by ``u`` (as generated, directed)."""
        return self.targets[self.indptr[u]:self.indptr[u + 1]]

    def routing_targets(self, u: int) -> np.ndarray:
        """Long-range neighbors usable by the router at ``u``."""
        return self._routing_targets[self._routing_indptr[u]:self._routing_indptr[u + 1]]

    def highway_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.is_highway)

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)


def _csr(src: np.ndarray, dst: np.ndarray, num_nodes: int):
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=num_nodes)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return indptr, dst[order].astype(np.int64)


def _slot_counters(m: np.ndarray):
    """Per-draw (source, slot) expansion for nodes drawing m targets each.

    Draw ``s`` of a node consumes EDGES counters ``1 + 2s`` and ``2 + 2s``
    (attempt 0); rejection retries for the same slot shift by ``2 * m`` per
    attempt, so counters never collide within a node.
    """
    total = int(m.sum())
    src_idx = np.repeat(np.arange(len(m)), m)
    if total and m.max() > 0:
        starts = np.concatenate([[0], np.cumsum(m)[:-1]])
        slot = np.arange(total) - starts[src_idx]
    else:
        slot = np.zeros(0, dtype=np.int64)
    return src_idx, slot


def _draw_torus_targets(seed: int, node_keys: np.ndarray, slot: np.ndarray,
                        m_of: np.ndarray, sampler: TorusRingSampler,
                        src_pos: np.ndarray, accept=None) -> np.ndarray:
    """Draw one target per slot from a torus ring sampler, with optional
    rejection (``accept(dst) -> bool mask``).  ``node_keys`` key the RNG,
    ``src_pos`` are positions in the sampler's id space, ``m_of`` the per-key
    slot counts (for the retry counter stride)."""
    total = len(slot)
    dst = np.empty(total, dtype=np.int64)
    pending = np.arange(total)
    attempt = np.zeros(total, dtype=np.int64)
    max_attempts = 100_000
    while len(pending):
        base = 2 * (attempt[pending] * m_of[pending] + slot[pending])
        u1 = uniforms(seed, Channel.EDGES, node_keys[pending], 1 + base)
        u2 = uniforms(seed, Channel.EDGES, node_keys[pending], 2 + base)
        cand = sampler.sample_targets(src_pos[pending], u1, u2)
        ok = accept(cand) if accept is not None else np.ones(len(cand), bool)
        dst[pending[ok]] = cand[ok]
        attempt[pending] += 1
        pending = pending[~ok]
        if len(pending) and attempt[pending[0]] > max_attempts:
            raise GenerationError(
                "rejection sampling failed to find eligible targets; "
                "candidate set too sparse — try a different seed")
    return dst


def _generate_grid_kleinberg(params: ModelParams, metric: GridMetric, seed: int):
    """Fast path for Kleinberg on a wraparound grid (also serves KH via the
    scaled highway torus)."""
    n = params.n
    num = metric.num_nodes
    nodes = np.arange(num, dtype=np.int64)
    m = connection_counts(np.full(num, params.q), seed, nodes)
    src_idx, slot = _slot_counters(m)
    sampler = TorusRingSampler(n, params.r)
    dst = _draw_torus_targets(seed, nodes[src_idx], slot, m[src_idx],
                              sampler, nodes[src_idx])
    indptr, targets = _csr(nodes[src_idx], dst, num)
    return GraphInstance(
        params=params, seed=seed, metric=metric,
        is_highway=np.ones(num, dtype=bool),
        popularity=np.ones(num), indptr=indptr, targets=targets)


def _generate_kh(params: ModelParams, metric: GridMetric, seed: int):
    n, k, Q = params.n, params.k, params.q
    s = params.highway_spacing
    n_h = n // s
    num_h = n_h * n_h
    hkeys = np.arange(num_h, dtype=np.int64)  # highway-grid ids
    m = connection_counts(np.full(num_h, Q * k), seed, hkeys)
    src_idx, slot = _slot_counters(m)
    # distances between highway nodes scale the n_H torus by s, so d^-r
    # sampling over the highway equals ring sampling on the n_H torus
    sampler = TorusRingSampler(n_h, params.r)
    hdst = _draw_torus_targets(seed, hkeys[src_idx], slot, m[src_idx],
                               sampler, hkeys[src_idx])
    # map highway-grid ids to grid ids
    def to_grid(h):
        return (h // n_h) * s * n + (h % n_h) * s
    gsrc = to_grid(hkeys[src_idx])
    gdst = to_grid(hdst)
    indptr, targets = _csr(gsrc, gdst, metric.num_nodes)
    is_highway = np.zeros(metric.num_nodes, dtype=bool)
    is_highway[to_grid(hkeys)] = True
    return GraphInstance(
        params=params, seed=seed, metric=metric,
        is_highway=is_highway, popularity=np.ones(metric.num_nodes),
        indptr=indptr, targets=targets, highway_spacing=s)


def _rh_variant_local_edges(params: ModelParams, seed: int, hnodes: np.ndarray):
    """One link per highway node into each of the 8 adjacent balls of radius
    3 * sqrt(k * log2(n)) that contains a highway node (picked uniformly)."""
    n = params.n
    radius = 3.0 * math.sqrt(params.k * math.log2(n))
    r_int = int(math.floor(radius))
    hx, hy = hnodes // n, hnodes % n
    # bucket highway nodes into cells of side max(r,1) for neighborhood lookup
    cell = max(r_int, 1)
    ncell = (n + cell - 1) // cell
    cid = (hx // cell) * ncell + hy // cell
    order = np.argsort(cid, kind="stable")
    cid_sorted = cid[order]
    src_out, dst_out = [], []
    deltas = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0)]
    for bi, (dx, dy) in enumerate(deltas):
        cx = (hx + dx * 2 * r_int) % n
        cy = (hy + dy * 2 * r_int) % n
        for i, u in enumerate(hnodes):
            # candidate highway nodes from the 3x3 cell patch around center
            cands = []
            bx, by = cx[i] // cell, cy[i] // cell
            for ox in (-1, 0, 1):
                for oy in (-1, 0, 1):
                    c = ((bx + ox) % ncell) * ncell + (by + oy) % ncell
                    lo = np.searchsorted(cid_sorted, c, side="left")
                    hi = np.searchsorted(cid_sorted, c, side="right")
                    if hi > lo:
                        cands.append(hnodes[order[lo:hi]])
            if not cands:
                continue
            cand = np.concatenate(cands)
            ddx = np.abs(cand // n - cx[i])
            ddy = np.abs(cand % n - cy[i])
            d = np.minimum(ddx, n - ddx) + np.minimum(ddy, n - ddy)
            members = cand[(d <= radius) & (cand != u)]
            if len(members) == 0:
                continue
            members = np.sort(members)
            u1 = float(uniforms(seed, Channel.EXTRA, u, bi))
            pick = members[min(int(u1 * len(members)), len(members) - 1)]
            src_out.append(u)
            dst_out.append(pick)
    if not src_out:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.array(src_out, dtype=np.int64), np.array(dst_out, dtype=np.int64)


def _generate_rh(params: ModelParams, metric: GridMetric, seed: int):
    n, k, Q = params.n, params.k, params.q
    num = metric.num_nodes
    nodes = np.arange(num, dtype=np.int64)
    is_highway = uniforms(seed, Channel.ROLE, nodes, 0) < (1.0 / k)
    hnodes = np.flatnonzero(is_highway)
    if len(hnodes) == 0:
        raise GenerationError(
            f"RH drew zero highway nodes at n={n}, k={k}; rerun with a "
            f"different seed")
    m = connection_counts(np.full(len(hnodes), Q * k), seed, hnodes)
    src_idx, slot = _slot_counters(m)
    src = hnodes[src_idx]
    if len(hnodes) == 1:
        # the sole highway node has no eligible targets
        dst = np.zeros(0, dtype=np.int64)
        src = dst.copy()
    elif len(hnodes) <= _EXPLICIT_MAX:
        dst = np.empty(len(src), dtype=np.int64)
        hx, hy = hnodes // n, hnodes % n
        for ui, u in enumerate(hnodes):
            mu = int(m[ui])
            if mu == 0:
                continue
            dx = np.abs(hx - hx[ui])
            dy = np.abs(hy - hy[ui])
            d = (np.minimum(dx, n - dx) + np.minimum(dy, n - dy)).astype(float)
            keep = hnodes != u
            sampler = ExplicitWeightSampler(hnodes[keep], d[keep] ** -params.r)
            u1 = uniforms(seed, Channel.EDGES, u, 1 + 2 * np.arange(mu))
            lo = np.searchsorted(src, u, side="left")
            dst[lo:lo + mu] = sampler.sample(u1)
    else:
        sampler = TorusRingSampler(n, params.r)
        dst = _draw_torus_targets(
            seed, src, slot, m[src_idx], sampler, src,
            accept=lambda cand: is_highway[cand])
    if params.rh_local_variant:
        vsrc, vdst = _rh_variant_local_edges(params, seed, hnodes)
        src = np.concatenate([src, vsrc])
        dst = np.concatenate([dst, vdst])
    indptr, targets = _csr(src, dst, num)
    return GraphInstance(
        params=params, seed=seed, metric=metric,
        is_highway=is_highway, popularity=np.ones(num),
        indptr=indptr, targets=targets)


def _wnpa_rates(params: ModelParams, popularity: np.ndarray) -> np.ndarray:
    # eps*Q*k scaled by the popularity normalization (1+eps) so that the
    # graph-wide mean out-degree is exactly Q
    return params.eps * params.q * popularity / (1.0 + params.eps)


def _generate_wnpa_grid(params: ModelParams, metric: GridMetric, seed: int):
    n = params.n
    num = metric.num_nodes
    nodes = np.arange(num, dtype=np.int64)
    pop = sample_popularities(seed, nodes, params.eps)
    m = connection_counts(_wnpa_rates(params, pop), seed, nodes)
    order = np.argsort(pop, kind="stable")
    pop_sorted = pop[order]
    lo = np.searchsorted(pop_sorted, pop / params.A, side="left")
    hi = np.searchsorted(pop_sorted, pop * params.A, side="right")
    wsize = hi - lo
    active = np.flatnonzero(m > 0)
    empty = 0
    inverse_square = params.window_weighting == "inverse_square"
    src_parts, dst_parts = [], []
    # fat windows: rejection against the shared full-torus sampler
    # (acceptance probability ~ window fraction, bounded below by rej_min/num)
    rej_min = max(256, num // 256)
    fat = active[wsize[active] >= rej_min]
    if len(fat):
        src_idx, slot = _slot_counters(m[fat])
        src = fat[src_idx]
        m_of = m[fat][src_idx]
        total = len(src)
        dst = np.empty(total, dtype=np.int64)
        pending = np.arange(total)
        attempt = np.zeros(total, dtype=np.int64)
        sampler = TorusRingSampler(n, params.r) if inverse_square else None
        while len(pending):
            base = 2 * (attempt[pending] * m_of[pending] + slot[pending])
            u1 = uniforms(seed, Channel.EDGES, src[pending], 1 + base)
            u2 = uniforms(seed, Channel.EDGES, src[pending], 2 + base)
            if inverse_square:
                cand = sampler.sample_targets(src[pending], u1, u2)
            else:
                cand = np.minimum((u1 * num).astype(np.int64), num - 1)
            ku = pop[src[pending]]
            ok = ((pop[cand] >= ku / params.A) & (pop[cand] <= ku * params.A)
                  & (cand != src[pending]))
            dst[pending[ok]] = cand[ok]
            attempt[pending] += 1
            pending = pending[~ok]
            if len(pending) and int(attempt[pending].max()) > 100_000:
                raise GenerationError("WNPA window rejection stalled; "
                                      "try a different seed")
        src_parts.append(src)
        dst_parts.append(dst)
    # thin windows: explicit per-source tables
    thin = active[wsize[active] < rej_min]
    xs, ys = nodes // n, nodes % n
    for u in thin:
        cand = order[lo[u]:hi[u]]
        cand = cand[cand != u]
        if len(cand) == 0:
            empty += 1
            continue
        mu = int(m[u])
        if inverse_square:
            dx = np.abs(xs[cand] - xs[u])
            dy = np.abs(ys[cand] - ys[u])
            d = (np.minimum(dx, n - dx) + np.minimum(dy, n - dy)).astype(float)
            weights = d ** -params.r
        else:
            weights = np.ones(len(cand))
        sampler = ExplicitWeightSampler(cand, weights)
        u1 = uniforms(seed, Channel.EDGES, u, 1 + 2 * np.arange(mu))
        src_parts.append(np.full(mu, u, dtype=np.int64))
        dst_parts.append(sampler.sample(u1))
    if src_parts:
        src = np.concatenate(src_parts)
        dst = np.concatenate(dst_parts)
    else:
        src = np.zeros(0, dtype=np.int64)
        dst = np.zeros(0, dtype=np.int64)
    indptr, targets = _csr(src, dst, num)
    log2n = math.log2(num) / 2  # log2(n) for an n x n grid
    is_highway = (pop >= log2n) & (pop <= params.A * log2n)
    return GraphInstance(
        params=params, seed=seed, metric=metric,
        is_highway=is_highway, popularity=pop,
        indptr=indptr, targets=targets, empty_window_count=empty)


def _generate_generic(params: ModelParams, metric: MetricHandle, seed: int):
    """Per-source explicit sampling for any exact metric (road networks,
    non-wraparound grids).  Same generative rules with metric distances."""
    num = metric.num_nodes
    nodes = np.arange(num, dtype=np.int64)
    labels = getattr(metric, "component_labels", None)
    if params.model == "kleinberg":
        is_highway = np.ones(num, dtype=bool)
        pop = np.ones(num)
        rates = np.full(num, params.q)
        eligible = nodes
    elif params.model == "rh":
        is_highway = uniforms(seed, Channel.ROLE, nodes, 0) < (1.0 / params.k)
        if not is_highway.any():
            raise GenerationError(
                f"RH drew zero highway nodes at k={params.k}; rerun with a "
                f"different seed")
        pop = np.ones(num)
        eligible = np.flatnonzero(is_highway)
        rates = np.full(len(eligible), params.q * params.k)
    elif params.model == "wnpa":
        pop = sample_popularities(seed, nodes, params.eps)
        log2n = math.log2(num) / 2
        is_highway = (pop >= log2n) & (pop <= params.A * log2n)
        eligible = nodes
        rates = _wnpa_rates(params, pop)
    else:
        raise ParameterError(
            f"model {params.model!r} requires a wraparound grid metric")
    m_eligible = connection_counts(rates, seed, eligible)
    active = eligible[m_eligible > 0]
    m = np.zeros(num, dtype=np.int64)
    m[eligible] = m_eligible
    if params.model == "wnpa":
        order = np.argsort(pop, kind="stable")
        pop_sorted = pop[order]
    inverse_square = params.window_weighting == "inverse_square"
    src_parts, dst_parts = [], []
    empty = 0
    restricted = 0
    batch_size = 512
    for start in range(0, len(active), batch_size):
        batch = active[start:start + batch_size]
        rows = _distance_rows(metric, batch)
        for bi, u in enumerate(batch):
            drow = rows[bi]
            if params.model == "kleinberg":
                cand = nodes
            elif params.model == "rh":
                cand = np.flatnonzero(is_highway)
            else:
                ku = pop[u]
                wl = np.searchsorted(pop_sorted, ku / params.A, side="left")
                wh = np.searchsorted(pop_sorted, ku * params.A, side="right")
                cand = order[wl:wh]
            cand = cand[cand != u]
            if labels is not None:
                mask = labels[cand] == labels[u]
                if mask.sum() < len(cand):
                    restricted += 1
                cand = cand[mask]
            if len(cand) == 0:
                empty += 1
                continue
            d = drow[cand].astype(float)
            finite = np.isfinite(d) & (d > 0)
            cand, d = cand[finite], d[finite]
            if len(cand) == 0:
                empty += 1
                continue
            weights = d ** -params.r if (inverse_square or params.model != "wnpa") \
                else np.ones(len(cand))
            sampler = ExplicitWeightSampler(cand, weights)
            mu = int(m[u])
            u1 = uniforms(seed, Channel.EDGES, u, 1 + 2 * np.arange(mu))
            src_parts.append(np.full(mu, u, dtype=np.int64))
            dst_parts.append(sampler.sample(u1))
    if src_parts:
        src = np.concatenate(src_parts)
        dst = np.concatenate(dst_parts)
    else:
        src = np.zeros(0, dtype=np.int64)
        dst = np.zeros(0, dtype=np.int64)
    if restricted:
        log.info("%d sources had candidates restricted to their component",
                 restricted)
    indptr, targets = _csr(src, dst, num)
    return GraphInstance(
        params=params, seed=seed, metric=metric,
        is_highway=is_highway, popularity=pop,
        indptr=indptr, targets=targets,
        empty_window_count=empty, component_restricted=restricted)


def _distance_rows(metric: MetricHandle, sources: np.ndarray) -> np.ndarray:
    many = getattr(metric, "distances_from_many", None)
    if many is not None:
        return many(sources)
    return np.stack([metric.distances_from(int(u)) for u in sources])


def generate(params: ModelParams, seed: int,
             metric: Optional[MetricHandle] = None) -> GraphInstance:
    """Generate an instance of ``params.model`` over ``metric`` (defaults to
    the grid implied by ``params``)."""
    params = params.validated()
    if metric is None:
        metric = GridMetric(GridTopology(params.n, wraparound=params.wraparound))
    fast_grid = isinstance(metric, GridMetric) and metric.topology.wraparound
    if params.model == "kleinberg":
        if fast_grid:
            return _generate_grid_kleinberg(params, metric, seed)
        return _generate_generic(params, metric, seed)
    if params.model == "kh":
        if not fast_grid:
            raise ParameterError("KH requires a wraparound grid metric "
                                 "(the highway is an evenly spaced subgrid)")
        return _generate_kh(params, metric, seed)
    if params.model == "rh":
        if fast_grid:
            return _generate_rh(params, metric, seed)
        return _generate_generic(params, metric, seed)
    if params.model == "wnpa":
        if fast_grid:
            return _generate_wnpa_grid(params, metric, seed)
        return _generate_generic(params, metric, seed)
    raise ParameterError(f"unknown model {params.model!r}")


def generate_kleinberg(params: ModelParams, seed: int) -> GraphInstance:
    """Kleinberg baseline: every node draws ``q`` targets among all others."""
    if params.model != "kleinberg":
        params = replace(params, model="kleinberg")
    return generate(params, seed)


def generate_kh(n: int, k: int, Q: float, seed: int, **kw) -> GraphInstance:
    """Kleinberg Highway: evenly spaced subgrid of ``n^2/k`` highway nodes,
    each drawing ``Q * k`` targets among highway nodes."""
    return generate(ModelParams(model="kh", n=n, k=k, q=Q, **kw), seed)


def generate_rh(n: int, k: int, Q: float, seed: int,
                variant_local: bool = False, **kw) -> GraphInstance:
    """Randomized Highway: Bernoulli(1/k) membership, ``Q * k`` targets per
    highway node; optional local links into the 8 adjacent balls."""
    return generate(ModelParams(model="rh", n=n, k=k, q=Q,
                                rh_local_variant=variant_local, **kw), seed)


def generate_wnpa(n: int, Q: float, eps: float, A: float, seed: int,
                  **kw) -> GraphInstance:
    """Windowed NPA: power-law popularity, targets restricted to the
    popularity window ``[k_u / A, A * k_u]``."""
    return generate(ModelParams(model="wnpa", n=n, q=Q, eps=eps, A=A, **kw), seed)


def generate_on_metric(params: ModelParams, metric: MetricHandle,
                       seed: int) -> GraphInstance:
    """Same generative rules with ``d(u, v)`` taken from an arbitrary exact
    metric.  A wraparound grid metric passed through here takes the identical
    code path as the grid generators (same seed, identical instance)."""
    return generate(params, seed, metric=metric)
