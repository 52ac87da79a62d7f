"""Numeric verification of the routing lemmas on concrete instances:
normalization constants, nested-lattice ball counts, sphere-overlap bounds,
and degree statistics.

Logarithms in all thresholds are base 2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError, ParameterError
from .metric import GridMetric, GridTopology
from .models import GraphInstance, ModelParams, generate
from .sampling import torus_ring_table

__all__ = [
    "LemmaReport",
    "normalization_constant",
    "kh_norm_report",
    "rh_norm_report",
    "check_ball_counts",
    "check_sphere_overlap",
    "sphere_overlap_ratio_at_2d",
    "degree_stats",
    "DegreeStats",
    "wnpa_degree_report",
]


@dataclass
class LemmaReport:
    """Outcome of one lemma check on a concrete instance or instance family.

    ``passed`` means the observed statistics satisfy the cited inequality, or
    that the violation count stays within the lemma's probability budget
    across seeds.
    """

    lemma: str
    instance: dict
    observed: dict
    bounds: dict
    passed: bool
    violations: int = 0
    checked: int = 0
    budget: Optional[str] = None
    notes: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _torus_distances(n: int, from_xy, to_x, to_y):
    dx = np.abs(to_x - from_xy[0])
    dy = np.abs(to_y - from_xy[1])
    return np.minimum(dx, n - dx) + np.minimum(dy, n - dy)


def normalization_constant(g: GraphInstance, u: int) -> float:
    """Exact sum of sampling weights over ``u``'s long-range candidate set.

    This is the denominator of the implemented target distribution: for KH it
    is computed in highway-grid units (the highway of spacing ``s`` scales an
    ``n/s`` torus, which is what the sampler draws over); for the other
    models it is the sum of ``d(u, w)^-r`` over eligible candidates ``w``.
    """
    params = g.params
    if params.model in ("kh", "rh") and not g.is_highway[u]:
        raise InputError(f"node {u} is not long-range eligible in {params.model}")
    r = params.r
    if params.model == "kh":
        s = g.highway_spacing
        n_h = params.n // s
        hx, hy = (u // params.n) // s, (u % params.n) // s
        hw = g.highway_nodes()
        wx, wy = (hw // params.n) // s, (hw % params.n) // s
        d = _torus_distances(n_h, (hx, hy), wx, wy).astype(float)
        d = d[d > 0]
        return float((d ** -r).sum())
    if params.model == "rh":
        cand = g.highway_nodes()
    elif params.model == "wnpa":
        pop = g.popularity
        mask = (pop >= pop[u] / params.A) & (pop <= pop[u] * params.A)
        cand = np.flatnonzero(mask)
    else:
        cand = np.arange(g.num_nodes)
    cand = cand[cand != u]
    if len(cand) == 0:
        return 0.0
    d = g.metric.distances_from(u, cand).astype(float)
    d = d[np.isfinite(d) & (d > 0)]
    return float((d ** -r).sum())


def kh_norm_report(n: int, k: int) -> LemmaReport:
    """Check ``z <= 4 ln(6 n_H)`` for every highway node of a KH instance.

    The highway subgrid is vertex-transitive, so every highway node sees the
    identical candidate-distance multiset; the per-node constant equals the
    ring-table total for the ``n_H`` torus, computed once and exact.
    """
    params = ModelParams(model="kh", n=n, k=k).validated()
    s = params.highway_spacing
    n_h = n // s
    if n_h < 2:
        z = 0.0
    else:
        z = torus_ring_table(n_h, 2.0)[4]
    bound = 4.0 * math.log(6.0 * n_h)
    passed = z <= bound
    return LemmaReport(
        lemma="kh-norm",
        instance={"n": n, "k": k, "n_H": n_h, "highway_nodes": n_h * n_h},
        observed={"z": z},
        bounds={"upper": bound},
        passed=passed,
        violations=0 if passed else n_h * n_h,
        checked=n_h * n_h,
        notes="z identical for all highway nodes by translation invariance")


def rh_norm_report(n: int, k: int, seeds, pass_fraction: float = 0.4,
                   q: float = 1.0) -> LemmaReport:
    """Exact per-highway-node z against the tight RH bound
    ``z' = 10 + 37 log2(n) / k``, which holds per node with probability at
    least 1/2.  Passes when the pooled fraction of nodes satisfying the bound
    reaches ``pass_fraction``."""
    bound = 10.0 + 37.0 * math.log2(n) / k
    good = 0
    total = 0
    for seed in seeds:
        g = generate(ModelParams(model="rh", n=n, k=k, q=q), seed)
        hw = g.highway_nodes()
        hx, hy = hw // n, hw % n
        chunk = 512
        for lo in range(0, len(hw), chunk):
            sl = slice(lo, min(lo + chunk, len(hw)))
            dx = np.abs(hx[sl, None] - hx[None, :])
            dy = np.abs(hy[sl, None] - hy[None, :])
            d = (np.minimum(dx, n - dx) + np.minimum(dy, n - dy)).astype(float)
            with np.errstate(divide="ignore"):
                w = d ** -2.0
            w[d == 0] = 0.0  # drop the self term (distinct nodes are >= 1 apart)
            z = w.sum(axis=1)
            good += int((z <= bound).sum())
            total += len(z)
    frac = good / total if total else 0.0
    return LemmaReport(
        lemma="rh-norm",
        instance={"n": n, "k": k, "seeds": list(seeds)},
        observed={"fraction_within_bound": frac, "nodes": total},
        bounds={"upper": bound, "required_fraction": pass_fraction},
        passed=frac >= pass_fraction,
        violations=total - good,
        checked=total,
        budget="bound holds per node with probability >= 1/2")


def _ball_offsets(n: int, radius: float):
    """Torus offsets (da, db) with lattice distance <= radius."""
    r = int(math.floor(radius))
    a = np.arange(n)
    da = np.minimum(a, n - a)
    dist = da[:, None] + da[None, :]
    offs = np.argwhere(dist <= r)
    return offs[:, 0], offs[:, 1]


def _ball_highway_counts(hw2d: np.ndarray, radius: float,
                         centers: Optional[np.ndarray] = None) -> np.ndarray:
    """Highway-node counts of balls of the given radius.

    With ``centers=None`` counts are returned for balls centered at every
    node (shifted-add over ball offsets); otherwise only at the given
    center ids."""
    n = hw2d.shape[0]
    da, db = _ball_offsets(n, radius)
    if centers is None:
        counts = np.zeros((n, n), dtype=np.int64)
        for a, b in zip(da, db):
            counts += np.roll(np.roll(hw2d, -a, axis=0), -b, axis=1)
        return counts.ravel()
    cx, cy = centers // n, centers % n
    counts = np.zeros(len(centers), dtype=np.int64)
    for a, b in zip(da, db):
        counts += hw2d[(cx + a) % n, (cy + b) % n]
    return counts


_MAX_EXHAUSTIVE_N = 256
_SAMPLED_CENTERS = 10_000


def check_ball_counts(g: GraphInstance, radius_class: str = "n") -> LemmaReport:
    """Nested-lattice highway counts for an RH instance.

    radius_class:
      * ``"n"``     — balls of radius ``3 sqrt(k log2 n)`` must hold at least
        ``9 log2 n`` and fewer than ``41 log2 n`` highway nodes (w.h.p.).
      * ``"loglog"`` — balls of radius ``3 sqrt(k log2 log2 n)`` must hold
        fewer than ``41 log2 log2 n`` (w.h.p. in ``log n``).
      * ``"const"`` — balls of radius ``2 sqrt(k)`` hold at most 18 highway
        nodes with probability at least 1/2; centers are sampled at spacing
        greater than ``4 sqrt(k)`` where the events are independent.
    """
    if g.params.model != "rh":
        raise ParameterError("ball-count lemmas apply to RH instances")
    n = g.params.n
    k = g.params.k
    log2n = math.log2(n)
    hw2d = g.is_highway.reshape(n, n).astype(np.int64)
    sampled = None
    if radius_class == "n":
        radius = 3.0 * math.sqrt(k * log2n)
        lower, upper = 9.0 * log2n, 41.0 * log2n
        if n > _MAX_EXHAUSTIVE_N:
            rng_idx = np.unique((np.linspace(0, n * n - 1, _SAMPLED_CENTERS)).astype(np.int64))
            counts = _ball_highway_counts(hw2d, radius, rng_idx)
            sampled = len(rng_idx)
        else:
            counts = _ball_highway_counts(hw2d, radius)
        below = int((counts < lower).sum())
        above = int((counts >= upper).sum())
        passed = below == 0 and above == 0
        return LemmaReport(
            lemma="rh-balls-n",
            instance={"n": n, "k": k, "seed": g.seed, "radius": radius},
            observed={"min_count": int(counts.min()), "max_count": int(counts.max()),
                      "centers": len(counts), "sampled": sampled},
            bounds={"lower": lower, "upper_exclusive": upper},
            passed=passed,
            violations=below + above,
            checked=len(counts),
            budget="w.h.p. in n (union bound over all centers)",
            notes="sampled centers" if sampled else "all centers")
    if radius_class == "loglog":
        radius = 3.0 * math.sqrt(k * math.log2(log2n))
        upper = 41.0 * math.log2(log2n)
        counts = _ball_highway_counts(hw2d, radius) if n <= _MAX_EXHAUSTIVE_N \
            else _ball_highway_counts(
                hw2d, radius,
                np.unique((np.linspace(0, n * n - 1, _SAMPLED_CENTERS)).astype(np.int64)))
        above = int((counts >= upper).sum())
        return LemmaReport(
            lemma="rh-balls-loglog",
            instance={"n": n, "k": k, "seed": g.seed, "radius": radius},
            observed={"max_count": int(counts.max()), "centers": len(counts)},
            bounds={"upper_exclusive": upper},
            passed=above == 0,
            violations=above,
            checked=len(counts),
            budget="w.h.p. in log n, for O(log^2 n) invocations")
    if radius_class == "const":
        radius = 2.0 * math.sqrt(k)
        spacing = int(math.ceil(4.0 * math.sqrt(k))) + 1
        coords = np.arange(0, n - spacing + 1, spacing) if spacing <= n \
            else np.array([0])
        centers = (coords[:, None] * n + coords[None, :]).ravel()
        counts = _ball_highway_counts(hw2d, radius, centers)
        ok = int((counts <= 18).sum())
        frac = ok / len(counts)
        return LemmaReport(
            lemma="rh-balls-const",
            instance={"n": n, "k": k, "seed": g.seed, "radius": radius,
                      "center_spacing": spacing},
            observed={"fraction_at_most_18": frac, "centers": len(centers)},
            bounds={"upper": 18, "required_fraction": 0.5},
            passed=frac >= 0.5,
            violations=len(counts) - ok,
            checked=len(counts),
            budget="probability >= 1/2 per ball, independent at the sampled spacing")
    raise ParameterError(f"unknown radius class {radius_class!r}")


def check_sphere_overlap(n: int, d: int) -> LemmaReport:
    """Verify ``j/2 <= |S_j(v) ∩ B_d(u)| <= 4j`` for every ``v`` at distance
    ``d`` from ``u`` and every ``1 <= j <= 2d``.

    The bound is a statement about the unbounded lattice (sphere sizes
    ``|S_j| = 4j``), so the enumeration runs on a flat window of radius
    ``3d`` around ``u``; ``n`` bounds the admissible ``d`` range (``d < n/2``).
    """
    if not (1 <= d < n / 2):
        raise ParameterError(f"requires 1 <= d < n/2, got d={d}, n={n}")
    R = 3 * d + 1
    xs, ys = np.meshgrid(np.arange(-R, R + 1), np.arange(-R, R + 1),
                         indexing="ij")
    dist_u = np.abs(xs) + np.abs(ys)
    ball = dist_u <= d
    violations = 0
    checked = 0
    worst = None
    for vx, vy in np.argwhere(dist_u == d) - R:
        dist_v = np.abs(xs - vx) + np.abs(ys - vy)
        for j in range(1, 2 * d + 1):
            inter = int(np.count_nonzero((dist_v == j) & ball))
            checked += 1
            if not (j / 2 <= inter <= 4 * j):
                violations += 1
                worst = {"v": (int(vx), int(vy)), "j": j, "count": inter}
    return LemmaReport(
        lemma="sphere-overlap",
        instance={"n": n, "d": d},
        observed={"checked_pairs": checked, "first_violation": worst},
        bounds={"lower": "j/2", "upper": "4j"},
        passed=violations == 0,
        violations=violations,
        checked=checked)


def sphere_overlap_ratio_at_2d(d: int, corner: bool = False) -> float:
    """Enumerated ratio ``|S_2d(v) ∩ B_d(u)| / |S_2d(v)|`` on the unbounded
    lattice, for a sphere-corner or non-corner ``v`` at distance ``d``."""
    R = 3 * d + 1
    xs, ys = np.meshgrid(np.arange(-R, R + 1), np.arange(-R, R + 1),
                         indexing="ij")
    dist_u = np.abs(xs) + np.abs(ys)
    ball = dist_u <= d
    vx, vy = (d, 0) if corner else (d - 1, 1)
    dist_v = np.abs(xs - vx) + np.abs(ys - vy)
    inter = int(np.count_nonzero((dist_v == 2 * d) & ball))
    return inter / (8 * d)


@dataclass
class DegreeStats:
    """Degree summary of an instance."""

    mean_out_degree: float
    highway_count: int
    highway_fraction: float
    highway_fraction_ci: tuple[float, float]
    tail_exponent: Optional[float] = None  # popularity power-law MLE (WNPA)


def degree_stats(g: GraphInstance) -> DegreeStats:
    """Exact mean out-degree; for WNPA also the maximum-likelihood power-law
    exponent of popularity (``alpha_hat = 1 + N / sum(ln k)``, support
    ``k >= 1``) and the highway-band fraction with a binomial CI."""
    num = g.num_nodes
    mean_deg = g.edge_count / num
    hcount = int(g.is_highway.sum())
    frac = hcount / num
    se = math.sqrt(max(frac * (1.0 - frac), 1e-300) / num)
    ci = (frac - 1.96 * se, frac + 1.96 * se)
    alpha = None
    if g.params.model == "wnpa":
        alpha = 1.0 + num / float(np.log(g.popularity).sum())
    return DegreeStats(mean_out_degree=mean_deg, highway_count=hcount,
                       highway_fraction=frac, highway_fraction_ci=ci,
                       tail_exponent=alpha)


def highway_band_probability(n: int, eps: float, A: float) -> float:
    """Closed-form mass of the popularity density on ``[log2 n, A log2 n]``:
    ``(log2 n)^-(1+eps) - (A log2 n)^-(1+eps)``."""
    L = math.log2(n)
    return L ** -(1.0 + eps) - (A * L) ** -(1.0 + eps)


def wnpa_degree_report(n: int, Q: float, eps: float, A: float, seed: int,
                       degree_tol: float = 0.05,
                       alpha_tol: float = 0.1) -> LemmaReport:
    """Check the WNPA degree law on one instance: mean out-degree ``Q``
    within tolerance, popularity tail exponent ``2 + eps`` within tolerance,
    and highway-band fraction within 3 sigma of the integrated density."""
    g = generate(ModelParams(model="wnpa", n=n, q=Q, eps=eps, A=A), seed)
    stats = degree_stats(g)
    p = highway_band_probability(n, eps, A)
    num = g.num_nodes
    sigma = math.sqrt(num * p * (1.0 - p))
    count_lo, count_hi = num * p - 3 * sigma, num * p + 3 * sigma
    ok_deg = abs(stats.mean_out_degree - Q) <= degree_tol
    ok_alpha = abs(stats.tail_exponent - (2.0 + eps)) <= alpha_tol
    ok_band = count_lo <= stats.highway_count <= count_hi
    return LemmaReport(
        lemma="wnpa-degree",
        instance={"n": n, "Q": Q, "eps": eps, "A": A, "seed": seed},
        observed={"mean_out_degree": stats.mean_out_degree,
                  "tail_exponent": stats.tail_exponent,
                  "highway_count": stats.highway_count,
                  "expected_highway_count": num * p},
        bounds={"degree": f"{Q} +- {degree_tol}",
                "tail_exponent": f"{2.0 + eps} +- {alpha_tol}",
                "highway_count": [count_lo, count_hi]},
        passed=ok_deg and ok_alpha and ok_band,
        violations=int(not ok_deg) + int(not ok_alpha) + int(not ok_band),
        checked=3)
