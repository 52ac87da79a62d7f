"""Graph dump/load: the generate subcommand's file formats.

JSON form: ``{"header": {model, params, seed}, "nodes": [{id, x, y, highway,
popularity}], "edges": [{src, dst}]}``.  Binary form for large instances: one
JSON header line followed by little-endian u32 id pairs; instances are fully
regenerable from ``(params, seed)``, so the loader rebuilds the instance and
checks the stored edges against it.
"""

from __future__ import annotations

import dataclasses
import json
from typing import Optional

import numpy as np

from .errors import InputError
from .metric import GridMetric, GridTopology
from .models import GraphInstance, ModelParams, generate

__all__ = ["dump_graph", "load_graph"]


def _node_xy(g: GraphInstance, i: int):
    if isinstance(g.metric, GridMetric):
        x, y = g.metric.topology.coords(i)
        return int(x), int(y)
    coords = getattr(g.metric, "road", None)
    if coords is not None and coords.coords is not None:
        x, y = coords.coords[i]
        return float(x), float(y)
    return 0, 0


def _header(g: GraphInstance, extra: Optional[dict]) -> dict:
    header = {
        "model": g.params.model,
        "params": dataclasses.asdict(g.params),
        "seed": g.seed,
    }
    if extra:
        header.update(extra)
    return header


def dump_graph(g: GraphInstance, path: str, fmt: str = "json",
               extra_header: Optional[dict] = None):
    """Write an instance to ``path`` in ``json`` or ``binary`` form."""
    if fmt == "json":
        src = np.repeat(np.arange(g.num_nodes), np.diff(g.indptr))
        doc = {
            "header": _header(g, extra_header),
            "nodes": [
                {"id": int(i), "x": _node_xy(g, int(i))[0],
                 "y": _node_xy(g, int(i))[1],
                 "highway": bool(g.is_highway[i]),
                 "popularity": float(g.popularity[i])}
                for i in range(g.num_nodes)
            ],
            "edges": [{"src": int(s), "dst": int(d)}
                      for s, d in zip(src, g.targets)],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, separators=(",", ":"))
            fh.write("\n")
    elif fmt == "binary":
        header = _header(g, extra_header)
        header["format"] = "binary-u32"
        header["edge_count"] = g.edge_count
        src = np.repeat(np.arange(g.num_nodes), np.diff(g.indptr))
        pairs = np.empty(2 * g.edge_count, dtype="<u4")
        pairs[0::2] = src
        pairs[1::2] = g.targets
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, separators=(",", ":")).encode("utf-8"))
            fh.write(b"\n")
            fh.write(pairs.tobytes())
    else:
        raise InputError(f"unknown graph format {fmt!r}")


def load_graph(path: str) -> GraphInstance:
    """Load a dumped instance (grid topologies; road instances are rebuilt
    from their source files instead)."""
    with open(path, "rb") as fh:
        first = fh.readline()
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: no JSON header: {exc}") from None
        if isinstance(header, dict) and header.get("format") == "binary-u32":
            params = ModelParams(**header["params"])
            seed = int(header["seed"])
            g = generate(params, seed)
            raw = np.frombuffer(fh.read(), dtype="<u4")
            if len(raw) != 2 * header["edge_count"] or g.edge_count != header["edge_count"]:
                raise InputError(
                    f"{path}: edge payload does not match header/regeneration "
                    f"({len(raw) // 2} vs {header['edge_count']} vs {g.edge_count})")
            return g
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        header = doc["header"]
        params = ModelParams(**header["params"])
        seed = int(header["seed"])
        nodes = doc["nodes"]
        edges = doc["edges"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"{path}: malformed graph document: {exc}") from None
    if params.topology != "grid":
        raise InputError("only grid instances can be loaded from dumps; "
                         "road instances are regenerated from road files")
    metric = GridMetric(GridTopology(params.n, wraparound=params.wraparound))
    num = metric.num_nodes
    if len(nodes) != num:
        raise InputError(f"{path}: expected {num} nodes, found {len(nodes)}")
    is_highway = np.zeros(num, dtype=bool)
    popularity = np.ones(num)
    for rec in nodes:
        i = int(rec["id"])
        is_highway[i] = bool(rec["highway"])
        popularity[i] = float(rec["popularity"])
    src = np.array([e["src"] for e in edges], dtype=np.int64)
    dst = np.array([e["dst"] for e in edges], dtype=np.int64)
    if len(src) and (src.max() >= num or dst.max() >= num):
        raise InputError(f"{path}: edge endpoint out of range")
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=num)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    spacing = params.highway_spacing if params.model == "kh" else None
    return GraphInstance(
        params=params, seed=seed, metric=metric, is_highway=is_highway,
        popularity=popularity, indptr=indptr, targets=dst[order],
        highway_spacing=spacing)
