"""Shared test helpers."""

from __future__ import annotations

import numpy as np

from hwroute.metric import GridMetric
from hwroute.models import GraphInstance


def assert_trace_valid(g: GraphInstance, trace):
    """Every consecutive path pair must be joined by an edge of the instance
    (local, highway-grid local, or long-range); arrived traces must end at
    the target."""
    assert trace.hops == len(trace.path) - 1
    assert sum(trace.phase_hops) == trace.hops
    assert trace.path[0] == trace.source
    if trace.terminated == "arrived":
        assert trace.path[-1] == trace.target
    on_grid = isinstance(g.metric, GridMetric)
    p = g.params.p
    spacing = g.highway_spacing if g.params.model == "kh" else None
    for a, b in zip(trace.path[:-1], trace.path[1:]):
        if on_grid:
            d = g.metric.distance(a, b)
            if 0 < d <= p:
                continue
            if (spacing is not None and g.is_highway[a] and g.is_highway[b]
                    and d == spacing):
                n = g.metric.topology.n
                ax, ay = a // n, a % n
                bx, by = b // n, b % n
                if ax == bx or ay == by:
                    continue
        else:
            if b in g.metric.neighbors(a):
                continue
        assert b in g.routing_targets(a), f"hop {a}->{b} is not an edge"
