"""Underlying geometry: square grids with lattice distance, ball and sphere
enumeration, and the distance-oracle interface shared with road networks.

Grid nodes are encoded as single integers ``id = x * n + y`` with coordinates
``0 <= x, y < n``.  The default wraparound (torus) metric is

    d(u, v) = min(dx, n - dx) + min(dy, n - dy)

with plain Manhattan distance behind the ``wraparound=False`` flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .errors import InputError, ParameterError

__all__ = [
    "GridTopology",
    "GridMetric",
    "MetricHandle",
    "lattice_distance",
    "ball_nodes",
    "sphere_nodes",
]


@dataclass(frozen=True)
class GridTopology:
    """An ``n x n`` grid, wraparound by default.

    With wraparound the maximum distance between any two nodes is
    ``2 * floor(n / 2)``.
    """

    n: int
    wraparound: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"grid side must be >= 1, got {self.n}")

    @property
    def num_nodes(self) -> int:
        return self.n * self.n

    @property
    def max_distance(self) -> int:
        if self.wraparound:
            return 2 * (self.n // 2)
        return 2 * (self.n - 1)

    def node_id(self, x: int, y: int) -> int:
        if not (0 <= x < self.n and 0 <= y < self.n):
            raise InputError(f"coordinates ({x}, {y}) out of range for n={self.n}")
        return x * self.n + y

    def coords(self, node: int) -> tuple[int, int]:
        if not (0 <= node < self.num_nodes):
            raise InputError(f"node id {node} out of range for n={self.n}")
        return node // self.n, node % self.n


def lattice_distance(u, v, topo: GridTopology) -> int:
    """Lattice distance between two grid nodes.

    ``u`` and ``v`` may be node ids or ``(x, y)`` pairs.
    """
    ux, uy = topo.coords(u) if np.isscalar(u) else u
    vx, vy = topo.coords(v) if np.isscalar(v) else v
    if not (0 <= ux < topo.n and 0 <= uy < topo.n
            and 0 <= vx < topo.n and 0 <= vy < topo.n):
        raise InputError(f"coordinates out of range for n={topo.n}")
    dx = abs(ux - vx)
    dy = abs(uy - vy)
    if topo.wraparound:
        return min(dx, topo.n - dx) + min(dy, topo.n - dy)
    return dx + dy


def _axis_offsets(c: int, n: int, wraparound: bool) -> list[int]:
    """Signed coordinate offsets whose per-axis distance contribution is c."""
    if c == 0:
        return [0]
    if wraparound:
        offs = []
        if c <= (n - 1) // 2:
            offs = [c, -c]
        elif n % 2 == 0 and c == n // 2:
            offs = [c]
        return offs
    return [c, -c]


def sphere_nodes(u: int, j: int, topo: GridTopology) -> np.ndarray:
    """All nodes at distance exactly ``j`` from ``u``, by ring walking.

    Runs in O(|output|): per-axis contributions ``(c, j - c)`` are enumerated
    directly instead of scanning the grid.  Radii beyond the metric's maximum
    yield an empty set.
    """
    if j < 0:
        raise ParameterError(f"sphere radius must be >= 0, got {j}")
    n = topo.n
    ux, uy = topo.coords(u)
    if j == 0:
        return np.array([u], dtype=np.int64)
    out = []
    for cx in range(0, j + 1):
        cy = j - cx
        xs = _axis_offsets(cx, n, topo.wraparound)
        ys = _axis_offsets(cy, n, topo.wraparound)
        if not xs or not ys:
            continue
        for dx in xs:
            x = (ux + dx) % n if topo.wraparound else ux + dx
            if not (0 <= x < n):
                continue
            for dy in ys:
                y = (uy + dy) % n if topo.wraparound else uy + dy
                if 0 <= y < n:
                    out.append(x * n + y)
    return np.unique(np.array(out, dtype=np.int64))


def ball_nodes(u: int, d: int, topo: GridTopology) -> np.ndarray:
    """All nodes within distance ``d`` of ``u`` (includes ``u``)."""
    if d < 0:
        raise ParameterError(f"ball radius must be >= 0, got {d}")
    parts = [sphere_nodes(u, j, topo) for j in range(0, min(d, topo.max_distance) + 1)]
    return np.unique(np.concatenate(parts))


@runtime_checkable
class MetricHandle(Protocol):
    """Distance oracle consumed by generators and routers.

    Implementations are immutable after construction and safe for concurrent
    reads.
    """

    num_nodes: int

    def distance(self, u: int, v: int) -> float: ...

    def distances_from(self, u: int, targets=None) -> np.ndarray: ...

    def ball(self, u: int, radius) -> np.ndarray: ...

    def sphere(self, u: int, radius) -> np.ndarray: ...


class GridMetric:
    """MetricHandle over a :class:`GridTopology`."""

    def __init__(self, topo: GridTopology):
        self.topology = topo
        self.num_nodes = topo.num_nodes
        # component labels: grids are connected
        self.component_labels = None

    def distance(self, u: int, v: int) -> int:
        return lattice_distance(u, v, self.topology)

    def distances_from(self, u: int, targets=None) -> np.ndarray:
        n = self.topology.n
        if targets is None:
            targets = np.arange(self.num_nodes, dtype=np.int64)
        else:
            targets = np.asarray(targets, dtype=np.int64)
        ux, uy = self.topology.coords(u)
        dx = np.abs(targets // n - ux)
        dy = np.abs(targets % n - uy)
        if self.topology.wraparound:
            return np.minimum(dx, n - dx) + np.minimum(dy, n - dy)
        return dx + dy

    def ball(self, u: int, radius) -> np.ndarray:
        return ball_nodes(u, int(np.floor(radius)), self.topology)

    def sphere(self, u: int, radius) -> np.ndarray:
        return sphere_nodes(u, int(radius), self.topology)
