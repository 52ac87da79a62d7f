"""Decentralized greedy routing engines.

``greedy_route`` is the baseline: at every step the message moves to the
out-neighbor (implicit local edges plus long-range contacts) closest to the
target, ties broken by smallest node id.  The model-specific engines follow
the three-step highway discipline: reach the highway, traverse it greedily,
then finish with local hops.  Phase hop counts are reported per trace and
always sum to the total.

All engines are pure functions of an immutable :class:`GraphInstance`; trials
can run them concurrently without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError, RoutingPolicyError
from .metric import GridMetric
from .models import GraphInstance

__all__ = [
    "RouteTrace",
    "RoutingPolicy",
    "greedy_route",
    "route_kh",
    "route_rh",
    "route_wnpa",
    "route",
]

POLICIES = ("kleinberg", "full_greedy", "kh_known", "kh_unknown", "rh",
            "wnpa_highway")


@dataclass(frozen=True)
class RoutingPolicy:
    """Routing policy selector with its constants.

    ``c`` scales the RH final-approach threshold ``c * (k + log2 n)``.  The
    hop limit must stay at least ``4n`` on grids so a lattice-only walk is
    never truncated.
    """

    policy: str = "full_greedy"
    c: float = 1.0
    hop_limit: Optional[int] = None

    def validated(self) -> "RoutingPolicy":
        if self.policy not in POLICIES:
            raise ParameterError(
                f"unknown policy {self.policy!r}; expected one of {POLICIES}")
        return self


@dataclass
class RouteTrace:
    """Result of one greedy-routing trial."""

    source: int
    target: int
    hops: int
    path: list[int]
    phase_hops: tuple[int, int, int]  # to-highway / on-highway / to-target
    dead_end_events: int = 0
    terminated: str = "arrived"  # arrived | hop_limit | stuck

    def __post_init__(self):
        assert self.hops == len(self.path) - 1
        assert sum(self.phase_hops) == self.hops


def default_hop_limit(g: GraphInstance) -> int:
    if isinstance(g.metric, GridMetric):
        return 16 * g.metric.topology.n
    return 4 * g.num_nodes


def _check_limit(g: GraphInstance, limit: Optional[int]) -> int:
    if limit is None:
        return default_hop_limit(g)
    if isinstance(g.metric, GridMetric) and limit < 4 * g.metric.topology.n:
        raise ParameterError(
            f"hop limit {limit} below 4n={4 * g.metric.topology.n}; would "
            f"truncate plain lattice walks")
    return limit


class _GridCtx:
    """Distance and neighbor helpers for one (instance, target) pair."""

    def __init__(self, g: GraphInstance, t: int):
        self.g = g
        self.n = g.metric.topology.n
        self.tx, self.ty = g.metric.topology.coords(t)
        p = g.params.p
        n = self.n
        if p == 1:
            self._local = ((1, 0), (-1 % n, 0), (0, 1), (0, -1 % n))
        else:
            offs = []
            for dx in range(-p, p + 1):
                for dy in range(-p, p + 1):
                    if 0 < abs(dx) + abs(dy) <= p:
                        offs.append((dx % n, dy % n))
            self._local = tuple(offs)

    def dist(self, u: int) -> int:
        n = self.n
        dx = abs(u // n - self.tx)
        dy = abs(u % n - self.ty)
        return min(dx, n - dx) + min(dy, n - dy)

    def dist_many(self, arr: np.ndarray) -> np.ndarray:
        n = self.n
        dx = np.abs(arr // n - self.tx)
        dy = np.abs(arr % n - self.ty)
        return np.minimum(dx, n - dx) + np.minimum(dy, n - dy)

    def best_of(self, cands, best_d, best_v):
        """Fold candidate node ids into the running (distance, id) minimum."""
        n = self.n
        if isinstance(cands, np.ndarray) and len(cands) > 8:
            d = self.dist_many(cands)
            j = int(d.min())
            if j < best_d or (j == best_d and int(cands[d == j].min()) < best_v):
                return j, int(cands[d == j].min())
            return best_d, best_v
        for v in cands:
            v = int(v)
            dx = abs(v // n - self.tx)
            dy = abs(v % n - self.ty)
            d = min(dx, n - dx) + min(dy, n - dy)
            if d < best_d or (d == best_d and v < best_v):
                best_d, best_v = d, v
        return best_d, best_v

    def local_neighbors(self, u: int):
        n = self.n
        ux, uy = u // n, u % n
        return [((ux + dx) % n) * n + (uy + dy) % n for dx, dy in self._local]

    def lattice_step(self, u: int) -> int:
        """One local hop greedily toward the target (min distance, min id)."""
        best_d, best_v = 1 << 60, -1
        best_d, best_v = self.best_of(self.local_neighbors(u), best_d, best_v)
        return best_v

    def lattice_step_toward(self, u: int, gx: int, gy: int) -> int:
        """One local hop toward an arbitrary goal coordinate."""
        n = self.n
        best = None
        for v in self.local_neighbors(u):
            dx = abs(v // n - gx)
            dy = abs(v % n - gy)
            d = min(dx, n - dx) + min(dy, n - dy)
            if best is None or (d, v) < best:
                best = (d, v)
        return best[1]


class _RoadCtx:
    """Road-network counterpart; distances to the target come from one
    shortest-path row (computable once per target and shared across trials)."""

    def __init__(self, g: GraphInstance, t: int, dist_row: Optional[np.ndarray]):
        self.g = g
        self.row = g.metric.distances_from(t) if dist_row is None else dist_row

    def dist(self, u: int) -> float:
        return float(self.row[u])

    def best_of(self, cands, best_d, best_v):
        if isinstance(cands, np.ndarray) and len(cands) > 8:
            d = self.row[cands]
            j = float(d.min())
            if j < best_d or (j == best_d and int(cands[d == j].min()) < best_v):
                return j, int(cands[d == j].min())
            return best_d, best_v
        for v in cands:
            v = int(v)
            d = float(self.row[v])
            if d < best_d or (d == best_d and v < best_v):
                best_d, best_v = d, v
        return best_d, best_v

    def local_neighbors(self, u: int):
        return self.g.metric.neighbors(u)


def _kh_grid_neighbors(ctx: _GridCtx, u: int, spacing: int):
    n = ctx.n
    ux, uy = u // n, u % n
    return [((ux + spacing) % n) * n + uy,
            ((ux - spacing) % n) * n + uy,
            ux * n + (uy + spacing) % n,
            ux * n + (uy - spacing) % n]


def greedy_route(g: GraphInstance, s: int, t: int,
                 limit: Optional[int] = None,
                 dist_row: Optional[np.ndarray] = None) -> RouteTrace:
    """Baseline greedy routing over all edges of the instance.

    On grids the local edges guarantee strict progress, so the walk always
    arrives within ``d(s, t)`` hops.  On road metrics a step with no strictly
    improving neighbor terminates the trace as ``stuck``.
    """
    limit = _check_limit(g, limit)
    on_grid = isinstance(g.metric, GridMetric)
    ctx = _GridCtx(g, t) if on_grid else _RoadCtx(g, t, dist_row)
    kh_spacing = g.highway_spacing if g.params.model == "kh" else None
    u = s
    path = [s]
    hops = 0
    terminated = "arrived"
    while u != t:
        if hops >= limit:
            terminated = "hop_limit"
            break
        best_d, best_v = 1 << 60, -1
        best_d, best_v = ctx.best_of(ctx.local_neighbors(u), best_d, best_v)
        if kh_spacing is not None and kh_spacing > 1 and g.is_highway[u]:
            best_d, best_v = ctx.best_of(
                _kh_grid_neighbors(ctx, u, kh_spacing), best_d, best_v)
        out = g.routing_targets(u)
        if len(out):
            best_d, best_v = ctx.best_of(out, best_d, best_v)
        if not on_grid and best_d >= ctx.dist(u):
            terminated = "stuck"
            break
        u = best_v
        path.append(u)
        hops += 1
    return RouteTrace(source=s, target=t, hops=hops, path=path,
                      phase_hops=(0, hops, 0), terminated=terminated)


def route_kh(g: GraphInstance, s: int, t: int, known_layout: bool = True,
             limit: Optional[int] = None) -> RouteTrace:
    """Three-step Kleinberg Highway routing.

    Phase 1 reaches the highway subgrid: a direct walk to the nearest highway
    point when the layout is known (at most ``2 * floor(sqrt(k)/2)`` hops),
    otherwise a serpentine scan of the ``sqrt(k) x sqrt(k)`` square anchored
    at the source (at most ``k - 1`` hops).  Phase 2 routes greedily over
    highway-grid local and long-range edges, exiting once the distance to the
    target drops below ``sqrt(k)`` or no highway move improves.  Phase 3
    finishes with plain lattice hops.
    """
    if g.params.model != "kh":
        raise RoutingPolicyError(f"route_kh applied to a {g.params.model!r} instance")
    limit = _check_limit(g, limit)
    ctx = _GridCtx(g, t)
    spacing = g.highway_spacing
    n = ctx.n
    u = s
    path = [s]
    p1 = p2 = p3 = 0
    terminated = "arrived"

    def done():
        return u == t or len(path) - 1 >= limit

    # phase 1: reach the highway
    if not g.is_highway[u] and u != t:
        if known_layout:
            ux, uy = u // n, u % n
            hx_opts = {(ux - ux % spacing) % n, (ux + (-ux) % spacing) % n}
            hy_opts = {(uy - uy % spacing) % n, (uy + (-uy) % spacing) % n}
            best = None
            for hx in hx_opts:
                for hy in hy_opts:
                    h = hx * n + hy
                    dx = abs(ux - hx)
                    dy = abs(uy - hy)
                    d = min(dx, n - dx) + min(dy, n - dy)
                    if best is None or (d, h) < best:
                        best = (d, h)
            gx, gy = best[1] // n, best[1] % n
            while u != best[1] and not done():
                u = ctx.lattice_step_toward(u, gx, gy)
                path.append(u)
                p1 += 1
        else:
            # serpentine scan of the spacing x spacing square anchored at s
            sx, sy = u // n, u % n
            scan = []
            for i in range(spacing):
                ys = range(spacing) if i % 2 == 0 else range(spacing - 1, -1, -1)
                for jj in ys:
                    scan.append((((sx + i) % n) * n + (sy + jj) % n))
            for v in scan[1:]:
                if g.is_highway[u] or done():
                    break
                u = v
                path.append(u)
                p1 += 1

    # phase 2: greedy over the highway (long-range + highway-grid local)
    while g.is_highway[u] and not done():
        du = ctx.dist(u)
        if du < spacing:
            break
        best_d, best_v = 1 << 60, -1
        if spacing > 1:
            best_d, best_v = ctx.best_of(
                _kh_grid_neighbors(ctx, u, spacing), best_d, best_v)
        else:
            best_d, best_v = ctx.best_of(ctx.local_neighbors(u), best_d, best_v)
        out = g.routing_targets(u)
        if len(out):
            best_d, best_v = ctx.best_of(out, best_d, best_v)
        if best_v < 0 or best_d >= du:
            break  # no highway move improves
        u = best_v
        path.append(u)
        p2 += 1

    # phase 3: local connections to the target
    while u != t and not done():
        u = ctx.lattice_step(u)
        path.append(u)
        p3 += 1

    if u != t:
        terminated = "hop_limit"
    return RouteTrace(source=s, target=t, hops=p1 + p2 + p3, path=path,
                      phase_hops=(p1, p2, p3), terminated=terminated)


def _highway_discipline(g: GraphInstance, s: int, t: int, highway: np.ndarray,
                        k_eff: float, c: float, limit: int,
                        restrict_lr: bool) -> RouteTrace:
    """Shared RH-style routing: lattice to the highway, greedy highway
    traversal with the distance-halving and 4*sqrt(k) disciplines, lattice
    final approach within ``c * (k + log2 n)``."""
    ctx = _GridCtx(g, t)
    n = ctx.n
    log2n = math.log2(n)
    thresh = c * (k_eff + log2n)
    skip = 4.0 * math.sqrt(k_eff)
    skip_hops = int(math.ceil(skip))
    large_k = k_eff >= log2n
    u = s
    path = [s]
    p1 = p2 = p3 = 0
    dead_ends = 0
    terminated = "arrived"

    def limited():
        return len(path) - 1 >= limit

    # phase 1: lattice-greedy until the first highway node
    while u != t and not highway[u] and not limited():
        u = ctx.lattice_step(u)
        path.append(u)
        p1 += 1

    # phase 2: traverse the highway
    while u != t and not limited():
        du = ctx.dist(u)
        if du <= thresh:
            break
        out = g.routing_targets(u)
        if restrict_lr and len(out):
            out = out[highway[out]]
        moved = False
        if len(out):
            d = ctx.dist_many(out)
            phase_bound = 2 ** math.floor(math.log2(du))
            better = d < phase_bound
            if better.any():
                dmin = int(d[better].min())
                u = int(out[better][d[better] == dmin].min())
                path.append(u)
                p2 += 1
                moved = True
            elif large_k:
                far = (du - d) >= skip
                if far.any():
                    dmin = int(d[far].min())
                    u = int(out[far][d[far] == dmin].min())
                    path.append(u)
                    p2 += 1
                    moved = True
        if moved:
            continue
        # dead end: fall back to lattice-greedy, walking 4*sqrt(k) hops
        # before re-checking highway membership
        dead_ends += 1
        walked = 0
        while u != t and not limited():
            u = ctx.lattice_step(u)
            path.append(u)
            p2 += 1
            walked += 1
            if walked >= skip_hops and highway[u]:
                break

    # phase 3: lattice-greedy final approach
    while u != t and not limited():
        u = ctx.lattice_step(u)
        path.append(u)
        p3 += 1

    if u != t:
        terminated = "hop_limit"
    return RouteTrace(source=s, target=t, hops=p1 + p2 + p3, path=path,
                      phase_hops=(p1, p2, p3), dead_end_events=dead_ends,
                      terminated=terminated)


def route_rh(g: GraphInstance, s: int, t: int, c: float = 1.0,
             limit: Optional[int] = None) -> RouteTrace:
    """Randomized Highway routing.

    On a highway node: take the best long-range contact in a better distance
    class if one exists; otherwise, for ``k >= log2 n``, take the best
    long-range contact improving the distance by at least ``4 * sqrt(k)``;
    otherwise walk the lattice (skipping ``4 * sqrt(k)`` hops before
    re-checking highway membership).  Within ``c * (k + log2 n)`` of the
    target, finish with lattice hops.
    """
    if g.params.model != "rh":
        raise RoutingPolicyError(f"route_rh applied to a {g.params.model!r} instance")
    limit = _check_limit(g, limit)
    return _highway_discipline(g, s, t, g.is_highway, float(g.params.k), c,
                               limit, restrict_lr=False)


def route_wnpa(g: GraphInstance, s: int, t: int, restricted: bool = False,
               c: float = 1.0, limit: Optional[int] = None) -> RouteTrace:
    """Windowed NPA routing.

    Unrestricted (the experimental behavior): plain greedy over all edges.
    Restricted (the analyzed variant): the popularity band
    ``[log2 n, A log2 n]`` acts as the highway; long-range edges not joining
    two highway nodes are ignored and the RH discipline runs with
    ``k' = (log2 n)^(1+eps)``.
    """
    if g.params.model != "wnpa":
        raise RoutingPolicyError(f"route_wnpa applied to a {g.params.model!r} instance")
    limit = _check_limit(g, limit)
    if not restricted:
        return greedy_route(g, s, t, limit)
    n = g.metric.topology.n if isinstance(g.metric, GridMetric) else \
        int(math.isqrt(g.num_nodes))
    k_eff = math.log2(n) ** (1.0 + g.params.eps)
    return _highway_discipline(g, s, t, g.is_highway, k_eff, c, limit,
                               restrict_lr=True)


def route(g: GraphInstance, s: int, t: int, policy: RoutingPolicy,
          dist_row: Optional[np.ndarray] = None) -> RouteTrace:
    """Dispatch on a :class:`RoutingPolicy`."""
    policy = policy.validated()
    if policy.policy in ("kleinberg", "full_greedy"):
        return greedy_route(g, s, t, policy.hop_limit, dist_row=dist_row)
    if policy.policy == "kh_known":
        return route_kh(g, s, t, known_layout=True, limit=policy.hop_limit)
    if policy.policy == "kh_unknown":
        return route_kh(g, s, t, known_layout=False, limit=policy.hop_limit)
    if policy.policy == "rh":
        return route_rh(g, s, t, c=policy.c, limit=policy.hop_limit)
    if policy.policy == "wnpa_highway":
        return route_wnpa(g, s, t, restricted=True, c=policy.c,
                          limit=policy.hop_limit)
    raise ParameterError(f"unknown policy {policy.policy!r}")
