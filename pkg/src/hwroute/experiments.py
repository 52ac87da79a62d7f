"""Batch trial execution, parameter sweeps, and model comparisons.

Trials sample source/target pairs uniformly at random (``s != t``), route
each pair, and aggregate hop statistics.  Comparisons use a paired design:
the same pair list is routed on every configuration, so mean-hop ratios are
variance-reduced and deterministic given the seeds.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvariantError, ParameterError
from .metric import GridMetric
from .models import GraphInstance, ModelParams, generate
from .routing import RoutingPolicy, route
from .sampling import Channel, derive_seed, uniforms

__all__ = [
    "StatSummary",
    "TrialData",
    "SweepPoint",
    "SweepCurve",
    "ComparisonRow",
    "ComparisonResult",
    "sample_pairs",
    "run_trials",
    "sweep_k",
    "compare_models",
]

log = logging.getLogger(__name__)

MIN_TRIALS = 30


@dataclass
class StatSummary:
    """Aggregated hop statistics over a batch of routing trials.

    The 95% CI uses the normal approximation; at least :data:`MIN_TRIALS`
    trials are required.  Hop statistics cover arrived trials; failures
    (stuck or hop-limited) are counted separately.
    """

    count: int
    mean: float
    median: float
    stddev: float
    ci_lo: float
    ci_hi: float
    phase_means: tuple[float, float, float]
    failures: int = 0


@dataclass
class TrialData:
    """Raw per-trial results (paired comparisons need the vectors)."""

    sources: np.ndarray
    targets: np.ndarray
    hops: np.ndarray
    phase_hops: np.ndarray      # (trials, 3)
    dead_ends: np.ndarray
    arrived: np.ndarray         # bool

    def summary(self) -> StatSummary:
        ok = self.arrived
        h = self.hops[ok].astype(float)
        if len(h) == 0:
            raise InvariantError("no trial arrived; cannot summarize")
        mean = float(h.mean())
        sd = float(h.std(ddof=1)) if len(h) > 1 else 0.0
        half = 1.96 * sd / math.sqrt(len(h))
        ph = self.phase_hops[ok].mean(axis=0)
        return StatSummary(
            count=len(self.hops), mean=mean, median=float(np.median(h)),
            stddev=sd, ci_lo=mean - half, ci_hi=mean + half,
            phase_means=(float(ph[0]), float(ph[1]), float(ph[2])),
            failures=int((~ok).sum()))


def sample_pairs(universe, pairs: int, seed: int):
    """Deterministic uniform source/target pairs with ``s != t``.

    ``universe`` is a node count or an array of admissible node ids (e.g.
    the largest road component)."""
    if pairs < 1:
        raise ParameterError("need at least one pair")
    ids = np.arange(universe) if np.isscalar(universe) else np.asarray(universe)
    if len(ids) < 2:
        raise ParameterError("need at least two nodes to sample pairs")
    out_s = np.empty(pairs, dtype=np.int64)
    out_t = np.empty(pairs, dtype=np.int64)
    have = 0
    counter = 0
    while have < pairs:
        want = pairs - have
        draw = max(2 * want + 16, 64)
        u = uniforms(seed, Channel.TRIALS, 0, counter + np.arange(2 * draw))
        counter += 2 * draw
        s = ids[np.minimum((u[:draw] * len(ids)).astype(np.int64), len(ids) - 1)]
        t = ids[np.minimum((u[draw:] * len(ids)).astype(np.int64), len(ids) - 1)]
        ok = s != t
        take = min(int(ok.sum()), want)
        out_s[have:have + take] = s[ok][:take]
        out_t[have:have + take] = t[ok][:take]
        have += take
    return out_s, out_t


def _route_block(g: GraphInstance, policy: RoutingPolicy, ss, tt,
                 dist_row=None):
    hops = np.empty(len(ss), dtype=np.int64)
    phases = np.empty((len(ss), 3), dtype=np.int64)
    dead = np.empty(len(ss), dtype=np.int64)
    arrived = np.empty(len(ss), dtype=bool)
    for i, (s, t) in enumerate(zip(ss, tt)):
        tr = route(g, int(s), int(t), policy, dist_row=dist_row)
        hops[i] = tr.hops
        phases[i] = tr.phase_hops
        dead[i] = tr.dead_end_events
        arrived[i] = tr.terminated == "arrived"
        if tr.terminated == "stuck" and isinstance(g.metric, GridMetric):
            raise InvariantError(
                f"greedy routing stuck on a grid ({s} -> {t}); local edges "
                f"guarantee progress, so this is a bug")
    return hops, phases, dead, arrived


def run_trials(g: GraphInstance, policy: RoutingPolicy, pairs: int, seed: int,
               threads: int = 1, return_trials: bool = False):
    """Route ``pairs`` uniform random pairs and aggregate.

    On road metrics, trials are grouped by target so each shortest-path row
    is computed once; pairs are drawn from the largest component.
    """
    if pairs < MIN_TRIALS:
        raise ParameterError(f"at least {MIN_TRIALS} trials required, got {pairs}")
    on_grid = isinstance(g.metric, GridMetric)
    if on_grid:
        universe = g.num_nodes
    else:
        labels = g.metric.component_labels
        universe = np.flatnonzero(labels == np.argmax(np.bincount(labels)))
        if policy.policy not in ("kleinberg", "full_greedy"):
            raise ParameterError(
                f"policy {policy.policy!r} runs on grid instances only")
    ss, tt = sample_pairs(universe, pairs, seed)
    if on_grid:
        nthreads = max(1, threads)
        if nthreads == 1:
            results = [_route_block(g, policy, ss, tt)]
        else:
            chunks = np.array_split(np.arange(pairs), nthreads * 4)
            with ThreadPoolExecutor(max_workers=nthreads) as pool:
                futs = [pool.submit(_route_block, g, policy, ss[c], tt[c])
                        for c in chunks if len(c)]
            results = [f.result() for f in futs]
    else:
        # group by target; one distance row per distinct target
        order = np.argsort(tt, kind="stable")
        results = []
        lo = 0
        while lo < pairs:
            hi = lo
            t = tt[order[lo]]
            while hi < pairs and tt[order[hi]] == t:
                hi += 1
            rows = g.metric.distances_from(int(t))
            results.append(_route_block(g, policy, ss[order[lo:hi]],
                                        tt[order[lo:hi]], dist_row=rows))
            lo = hi
        # restore original pair order
        inv = np.argsort(order, kind="stable")
        merged = tuple(np.concatenate([r[i] for r in results]) for i in range(4))
        results = [tuple(m[inv] for m in merged)]
    hops = np.concatenate([r[0] for r in results])
    phases = np.concatenate([r[1] for r in results])
    dead = np.concatenate([r[2] for r in results])
    arrived = np.concatenate([r[3] for r in results])
    data = TrialData(sources=ss, targets=tt, hops=hops, phase_hops=phases,
                     dead_ends=dead, arrived=arrived)
    if return_trials:
        return data.summary(), data
    return data.summary()


@dataclass
class SweepPoint:
    k: int
    summary: StatSummary
    graph_seeds: list[int]


@dataclass
class SweepCurve:
    """One parameter sweep: ``(k, StatSummary)`` per swept value."""

    param_name: str
    model: str
    n: int
    q: float
    pairs: int
    seed: int
    points: list[SweepPoint] = field(default_factory=list)

    def argmin_k(self) -> int:
        best = min(self.points, key=lambda p: p.summary.mean)
        return best.k

    def csv_rows(self):
        rows = [("k", "mean", "median", "stddev", "ci_lo", "ci_hi", "pairs",
                 "seeds")]
        for p in self.points:
            s = p.summary
            rows.append((p.k, s.mean, s.median, s.stddev, s.ci_lo, s.ci_hi,
                         s.count, ";".join(str(g) for g in p.graph_seeds)))
        return rows


def _policy_for_model(model: str) -> RoutingPolicy:
    if model == "kh":
        return RoutingPolicy(policy="kh_known")
    if model == "rh":
        return RoutingPolicy(policy="rh")
    return RoutingPolicy(policy="full_greedy")


def sweep_k(model: str, n: int, Q: float, k_values: Sequence[int], pairs: int,
            seed: int, graph_seeds: int = 3,
            policy: Optional[RoutingPolicy] = None,
            threads: int = 1) -> SweepCurve:
    """Sweep the highway parameter ``k`` for KH or RH at fixed ``n`` and
    average degree ``Q``.  Each point pools trials over ``graph_seeds``
    independently generated instances (seeds derived from ``seed`` and
    recorded in the curve); invalid ``k`` values are skipped with a warning.
    """
    if model not in ("kh", "rh"):
        raise ParameterError(f"sweep over k supports kh/rh, got {model!r}")
    curve = SweepCurve(param_name="k", model=model, n=n, q=Q, pairs=pairs,
                       seed=seed)
    pol = policy or _policy_for_model(model)
    per_seed = max(MIN_TRIALS, math.ceil(pairs / graph_seeds))
    for ki, k in enumerate(k_values):
        params = ModelParams(model=model, n=n, k=int(k), q=Q)
        try:
            params = params.validated()
        except ParameterError as exc:
            log.warning("skipping k=%s: %s", k, exc)
            continue
        seeds = [derive_seed(seed, ki, i) for i in range(graph_seeds)]
        datas = []
        for gs in seeds:
            g = generate(params, gs)
            _, data = run_trials(g, pol, per_seed, gs, threads=threads,
                                 return_trials=True)
            datas.append(data)
        pooled = TrialData(
            sources=np.concatenate([d.sources for d in datas]),
            targets=np.concatenate([d.targets for d in datas]),
            hops=np.concatenate([d.hops for d in datas]),
            phase_hops=np.concatenate([d.phase_hops for d in datas]),
            dead_ends=np.concatenate([d.dead_ends for d in datas]),
            arrived=np.concatenate([d.arrived for d in datas]))
        curve.points.append(SweepPoint(k=int(k), summary=pooled.summary(),
                                       graph_seeds=seeds))
    return curve


@dataclass
class ComparisonRow:
    label: str
    summary: StatSummary
    ratio_vs_baseline: float
    # paired difference (baseline hops - this model's hops); positive mean
    # favors this model; None for the baseline row
    diff_mean: Optional[float] = None
    diff_ci_lo: Optional[float] = None
    diff_ci_hi: Optional[float] = None


@dataclass
class ComparisonResult:
    pairs: int
    seed: int
    rows: list[ComparisonRow] = field(default_factory=list)

    def csv_rows(self):
        rows = [("model", "mean", "ci_lo", "ci_hi", "ratio_vs_baseline")]
        for r in self.rows:
            rows.append((r.label, r.summary.mean, r.summary.ci_lo,
                         r.summary.ci_hi, r.ratio_vs_baseline))
        return rows


def compare_models(configs, pairs: int, seed: int, graph_seeds: int = 1,
                   metric=None, threads: int = 1) -> ComparisonResult:
    """Paired comparison of model configurations on a common topology.

    ``configs`` is a sequence of ``(label, ModelParams, RoutingPolicy)``;
    the first entry is the baseline.  Every configuration routes the same
    pair list (drawn once from ``seed``), with one pair slice per graph seed,
    so ratios are variance-reduced.
    """
    if len(configs) < 1:
        raise ParameterError("need at least one configuration")
    ns = {p.n for _, p, _ in configs}
    topos = {p.topology for _, p, _ in configs}
    if len(ns) > 1 or len(topos) > 1:
        raise ParameterError(
            f"configurations must share a topology; got n={ns}, topology={topos}")
    if pairs < MIN_TRIALS:
        raise ParameterError(f"at least {MIN_TRIALS} trials required, got {pairs}")
    per_seed = math.ceil(pairs / graph_seeds)
    all_hops: list[np.ndarray] = []
    all_ok: list[np.ndarray] = []
    summaries: list[StatSummary] = []
    for label, params, policy in configs:
        datas = []
        for i in range(graph_seeds):
            gs = derive_seed(seed, 1000 + i)
            g = generate(params.validated(), gs, metric=metric)
            # pair seed depends only on (seed, i): identical across configs
            _, data = run_trials(g, policy, per_seed, derive_seed(seed, i),
                                 threads=threads, return_trials=True)
            datas.append(data)
        pooled = TrialData(
            sources=np.concatenate([d.sources for d in datas]),
            targets=np.concatenate([d.targets for d in datas]),
            hops=np.concatenate([d.hops for d in datas]),
            phase_hops=np.concatenate([d.phase_hops for d in datas]),
            dead_ends=np.concatenate([d.dead_ends for d in datas]),
            arrived=np.concatenate([d.arrived for d in datas]))
        all_hops.append(pooled.hops)
        all_ok.append(pooled.arrived)
        summaries.append(pooled.summary())
    result = ComparisonResult(pairs=pairs, seed=seed)
    base_hops, base_ok = all_hops[0], all_ok[0]
    base_mean = summaries[0].mean
    for i, (label, params, policy) in enumerate(configs):
        ratio = summaries[i].mean / base_mean
        if i == 0:
            result.rows.append(ComparisonRow(label=label, summary=summaries[i],
                                             ratio_vs_baseline=1.0))
            continue
        both = base_ok & all_ok[i]
        diff = base_hops[both].astype(float) - all_hops[i][both].astype(float)
        dm = float(diff.mean())
        half = 1.96 * float(diff.std(ddof=1)) / math.sqrt(len(diff))
        result.rows.append(ComparisonRow(
            label=label, summary=summaries[i], ratio_vs_baseline=ratio,
            diff_mean=dm, diff_ci_lo=dm - half, diff_ci_hi=dm + half))
    return result
