"""Road-network ingestion and exact shortest-path distance oracles.

Road graphs are undirected weighted edge lists (DIMACS ``.gr``/``.co`` or CSV)
adapted to the metric-handle interface, so every generator and router runs
unchanged with ``d(u, v)`` equal to the exact shortest-path length.  Road
edges themselves play the role of local connections during routing.

A deterministic synthetic generator provides state-scale test networks
(clustered settlements joined by long subdivided corridors, the structural
regime of U.S. state road graphs) for desk-scale experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import InputError, ParameterError

__all__ = [
    "RoadGraph",
    "RoadMetric",
    "load_road_network",
    "single_source_distances",
    "synthesize_road_network",
    "write_dimacs",
    "write_csv_edgelist",
]

UNREACHABLE = np.inf


@dataclass
class RoadGraph:
    """Undirected weighted road graph with integer edge weights.

    ``component_labels`` marks connected components; the largest one is the
    default universe for trial sampling.
    """

    num_nodes: int
    edges: np.ndarray          # (m, 2) int64, u < v
    weights: np.ndarray        # (m,) int64, >= 0
    coords: Optional[np.ndarray] = None  # (n, 2) float64
    component_labels: np.ndarray = field(default=None)
    adjacency: csr_matrix = field(default=None, repr=False)

    def __post_init__(self):
        if self.adjacency is None:
            u, v = self.edges[:, 0], self.edges[:, 1]
            w = self.weights.astype(float)
            self.adjacency = csr_matrix(
                (np.concatenate([w, w]),
                 (np.concatenate([u, v]), np.concatenate([v, u]))),
                shape=(self.num_nodes, self.num_nodes))
        if self.component_labels is None:
            _, labels = connected_components(self.adjacency, directed=False)
            self.component_labels = labels

    @property
    def largest_component(self) -> int:
        return int(np.argmax(np.bincount(self.component_labels)))

    def largest_component_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.component_labels == self.largest_component)


def _normalize_weights(raw: np.ndarray, scale: float) -> np.ndarray:
    """Integerize edge weights for deterministic distance comparisons.

    Integral inputs pass through; fractional ones are scaled then rounded."""
    raw = np.asarray(raw, dtype=float)
    if np.any(raw < 0):
        raise InputError("edge weights must be nonnegative")
    if np.allclose(raw, np.round(raw), rtol=0, atol=1e-9):
        return np.round(raw).astype(np.int64)
    return np.round(raw * scale).astype(np.int64)


def load_road_network(path: str, fmt: str = "dimacs-gr+co",
                      coords_path: Optional[str] = None,
                      weight_scale: float = 1000.0) -> RoadGraph:
    """Load a road network from disk.

    ``dimacs-gr+co``: ``.gr`` arc lines ``a u v w`` (1-based ids, symmetrized)
    plus optional ``.co`` coordinate lines ``v id x y``.
    ``csv-edgelist``: ``u,v,w`` rows plus an optional ``id,x,y`` node file.
    """
    if fmt == "dimacs-gr+co":
        edges, weights, n_declared = _parse_dimacs_gr(path)
    elif fmt == "csv-edgelist":
        edges, weights, n_declared = _parse_csv_edgelist(path)
    else:
        raise ParameterError(f"unknown road format {fmt!r}")
    if len(edges) == 0:
        raise InputError(f"{path}: no edges parsed")
    num_nodes = max(n_declared, int(edges.max()) + 1)
    coords = None
    if coords_path is not None:
        coords = _parse_coords(coords_path, fmt, num_nodes)
        num_nodes = max(num_nodes, len(coords))
    # symmetrize duplicates deterministically: keep the minimum weight
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    if np.any(lo == hi):
        bad = int(np.flatnonzero(lo == hi)[0])
        raise InputError(f"{path}: self-loop road edge at row {bad}")
    key = lo.astype(np.int64) * num_nodes + hi
    order = np.lexsort((weights, key))
    key, keep_w = key[order], weights[order]
    first = np.concatenate([[True], key[1:] != key[:-1]])
    edges = np.stack([key[first] // num_nodes, key[first] % num_nodes], axis=1)
    weights = _normalize_weights(keep_w[first], weight_scale)
    return RoadGraph(num_nodes=num_nodes, edges=edges.astype(np.int64),
                     weights=weights, coords=coords)


def _parse_dimacs_gr(path: str):
    edges, weights = [], []
    n_declared = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("c"):
                continue
            parts = line.split()
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "sp":
                    raise InputError(f"{path}:{lineno}: malformed problem line")
                n_declared = int(parts[2])
            elif parts[0] == "a":
                if len(parts) != 4:
                    raise InputError(f"{path}:{lineno}: malformed arc line")
                try:
                    u, v, w = int(parts[1]), int(parts[2]), float(parts[3])
                except ValueError as exc:
                    raise InputError(f"{path}:{lineno}: {exc}") from None
                if u < 1 or v < 1:
                    raise InputError(f"{path}:{lineno}: DIMACS ids are 1-based")
                edges.append((u - 1, v - 1))
                weights.append(w)
            else:
                raise InputError(f"{path}:{lineno}: unknown record {parts[0]!r}")
    if edges:
        e = np.array(edges, dtype=np.int64)
        if n_declared and int(e.max()) >= n_declared:
            raise InputError(
                f"{path}: arc endpoint {int(e.max()) + 1} exceeds declared "
                f"node count {n_declared}")
        return e, np.array(weights), n_declared
    return np.zeros((0, 2), dtype=np.int64), np.zeros(0), n_declared


def _parse_csv_edgelist(path: str):
    import csv as _csv
    edges, weights = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(_csv.reader(fh), 1):
            if not row or row[0].strip().startswith("#"):
                continue
            if lineno == 1 and not row[0].strip().lstrip("-").isdigit():
                continue  # header row
            if len(row) < 3:
                raise InputError(f"{path}:{lineno}: expected u,v,w")
            try:
                edges.append((int(row[0]), int(row[1])))
                weights.append(float(row[2]))
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    return (np.array(edges, dtype=np.int64) if edges else np.zeros((0, 2), np.int64),
            np.array(weights), 0)


def _parse_coords(path: str, fmt: str, num_nodes: int) -> np.ndarray:
    import csv as _csv
    coords = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        if fmt == "dimacs-gr+co":
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("c") or line.startswith("p"):
                    continue
                parts = line.split()
                if parts[0] != "v" or len(parts) != 4:
                    raise InputError(f"{path}:{lineno}: malformed coordinate line")
                coords[int(parts[1]) - 1] = (float(parts[2]), float(parts[3]))
        else:
            for lineno, row in enumerate(_csv.reader(fh), 1):
                if not row or row[0].strip().startswith("#"):
                    continue
                if lineno == 1 and not row[0].strip().lstrip("-").isdigit():
                    continue
                if len(row) < 3:
                    raise InputError(f"{path}:{lineno}: expected id,x,y")
                coords[int(row[0])] = (float(row[1]), float(row[2]))
    if coords and max(coords) >= num_nodes:
        num_nodes = max(coords) + 1
    out = np.full((num_nodes, 2), np.nan)
    for i, xy in coords.items():
        out[i] = xy
    return out


def single_source_distances(g: RoadGraph, u: int) -> np.ndarray:
    """Exact shortest-path distances from ``u`` (unreachable = inf)."""
    if not (0 <= u < g.num_nodes):
        raise InputError(f"node {u} out of range")
    return dijkstra(g.adjacency, directed=False, indices=[u])[0]


class RoadMetric:
    """MetricHandle over a road graph with a write-once per-source cache.

    ``distance_runs`` counts single-source computations so generation can be
    audited against its eligible-source bound.
    """

    def __init__(self, road: RoadGraph, cache_rows: int = 64):
        self.road = road
        self.num_nodes = road.num_nodes
        self.component_labels = road.component_labels
        self.distance_runs = 0
        self._cache: dict[int, np.ndarray] = {}
        self._cache_rows = cache_rows

    def neighbors(self, u: int) -> np.ndarray:
        a = self.road.adjacency
        return a.indices[a.indptr[u]:a.indptr[u + 1]]

    def distance(self, u: int, v: int) -> float:
        return float(self.distances_from(u)[v])

    def distances_from(self, u: int, targets=None) -> np.ndarray:
        row = self._cache.get(u)
        if row is None:
            row = single_source_distances(self.road, u)
            self.distance_runs += 1
            if len(self._cache) < self._cache_rows:
                self._cache[u] = row
        if targets is None:
            return row
        return row[np.asarray(targets)]

    def distances_from_many(self, sources: np.ndarray) -> np.ndarray:
        self.distance_runs += len(sources)
        return dijkstra(self.road.adjacency, directed=False,
                        indices=np.asarray(sources))

    def ball(self, u: int, radius) -> np.ndarray:
        d = self.distances_from(u)
        return np.flatnonzero(d <= radius)

    def sphere(self, u: int, radius) -> np.ndarray:
        d = self.distances_from(u)
        return np.flatnonzero(d == radius)


def synthesize_road_network(seed: int, n_intersections: int = 900,
                            n_towns: int = 25, town_sigma: float = 5.0,
                            extent: float = 7000.0, town_fraction: float = 0.9,
                            segment_length: float = 12.0) -> RoadGraph:
    """Deterministic state-scale synthetic road network.

    Intersections cluster into towns of power-law sizes plus rural scatter;
    a Delaunay triangulation (longest 3% of links dropped) provides the road
    skeleton, and every road is subdivided into segments of roughly
    ``segment_length`` so the graph is dominated by degree-2 chain nodes, as
    real state road graphs are.  Restricted to the largest component.
    """
    from scipy.spatial import Delaunay

    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.1 * extent, 0.9 * extent, size=(n_towns, 2))
    sizes = rng.pareto(1.0, n_towns) + 1
    sizes = (sizes / sizes.sum() * (n_intersections * town_fraction)).astype(int)
    pts = [rng.normal(c, town_sigma * (1 + 3 * rng.random()), size=(s, 2))
           for c, s in zip(centers, sizes)]
    pts.append(rng.uniform(0, extent, size=(n_intersections - sizes.sum(), 2)))
    P = np.vstack(pts)
    tri = Delaunay(P)
    eset = set()
    for simplex in tri.simplices:
        for i in range(3):
            a, b = int(simplex[i]), int(simplex[(i + 1) % 3])
            eset.add((min(a, b), max(a, b)))
    E = np.array(sorted(eset))
    L = np.hypot(*(P[E[:, 0]] - P[E[:, 1]]).T)
    keep = L < np.percentile(L, 97)
    E, L = E[keep], L[keep]
    # subdivide long roads into chains
    xs = list(P[:, 0])
    ys = list(P[:, 1])
    nid = len(P)
    src, dst, w = [], [], []
    for (a, b), length in zip(E, L):
        nseg = max(1, int(math.ceil(length / segment_length)))
        prev = a
        for si in range(1, nseg):
            t = si / nseg
            xs.append(P[a, 0] * (1 - t) + P[b, 0] * t)
            ys.append(P[a, 1] * (1 - t) + P[b, 1] * t)
            src.append(prev)
            dst.append(nid)
            w.append(length / nseg)
            prev = nid
            nid += 1
        src.append(prev)
        dst.append(b)
        w.append(length / nseg)
    edges = np.stack([np.minimum(src, dst), np.maximum(src, dst)], axis=1)
    weights = np.maximum(np.round(w).astype(np.int64), 1)
    coords = np.stack([xs, ys], axis=1)
    g = RoadGraph(num_nodes=nid, edges=edges.astype(np.int64),
                  weights=weights, coords=coords)
    # keep only the largest component (greedy routing across components is
    # undefined); remap to contiguous ids
    keep_nodes = g.largest_component_nodes()
    if len(keep_nodes) < g.num_nodes:
        remap = -np.ones(g.num_nodes, dtype=np.int64)
        remap[keep_nodes] = np.arange(len(keep_nodes))
        mask = (g.component_labels[g.edges[:, 0]] == g.largest_component)
        g = RoadGraph(num_nodes=len(keep_nodes),
                      edges=remap[g.edges[mask]],
                      weights=g.weights[mask],
                      coords=g.coords[keep_nodes])
    return g


def write_dimacs(g: RoadGraph, gr_path: str, co_path: Optional[str] = None):
    """Write a road graph in DIMACS format (1-based ids, both arc directions)."""
    with open(gr_path, "w", encoding="utf-8") as fh:
        fh.write(f"p sp {g.num_nodes} {2 * len(g.edges)}\n")
        for (u, v), w in zip(g.edges, g.weights):
            fh.write(f"a {u + 1} {v + 1} {w}\n")
            fh.write(f"a {v + 1} {u + 1} {w}\n")
    if co_path is not None and g.coords is not None:
        with open(co_path, "w", encoding="utf-8") as fh:
            for i, (x, y) in enumerate(g.coords):
                fh.write(f"v {i + 1} {x:.3f} {y:.3f}\n")


def write_csv_edgelist(g: RoadGraph, edges_path: str,
                       nodes_path: Optional[str] = None):
    """Write a road graph as ``u,v,w`` rows plus an ``id,x,y`` node file."""
    with open(edges_path, "w", encoding="utf-8") as fh:
        fh.write("u,v,w\n")
        for (u, v), w in zip(g.edges, g.weights):
            fh.write(f"{u},{v},{w}\n")
    if nodes_path is not None and g.coords is not None:
        with open(nodes_path, "w", encoding="utf-8") as fh:
            fh.write("id,x,y\n")
            for i, (x, y) in enumerate(g.coords):
                fh.write(f"{i},{x:.3f},{y:.3f}\n")
