"""Command-line entry point: generate / route / sweep / compare / validate.

Every artifact embeds its fully resolved run configuration (first ``#``
comment line of CSVs, ``config`` key of JSON payloads) so runs are
self-describing and reproducible; identical flags and seed produce
byte-identical payloads (the timestamp field is suppressed by
``--no-timestamp``).

Exit codes: 0 success, 2 invalid flags/parameters, 3 I/O failure,
4 internal invariant breach.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys
from datetime import datetime, timezone
from typing import Optional

import click
import numpy as np

from .errors import (GenerationError, HwrouteError, InputError,
                     InvariantError, ParameterError, RoutingPolicyError)
from .experiments import compare_models, run_trials, sweep_k
from .graphio import dump_graph, load_graph
from .models import ModelParams, generate
from .roadnet import RoadMetric, load_road_network
from .routing import RoutingPolicy
from . import validation

__all__ = ["main", "cli", "parse_config_header"]


def _threads_default() -> int:
    try:
        return max(1, int(os.environ.get("HWROUTE_THREADS", "1")))
    except ValueError:
        return 1


def _config_dict(subcommand: str, options: dict, no_timestamp: bool) -> dict:
    cfg = {"subcommand": subcommand}
    cfg.update({k: v for k, v in sorted(options.items())})
    if not no_timestamp:
        cfg["timestamp"] = datetime.now(timezone.utc).isoformat()
    return cfg


def parse_config_header(path: str) -> dict:
    """Read back the embedded run configuration of any artifact."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
    if first.startswith("# config: "):
        return json.loads(first[len("# config: "):])
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict) and "config" in doc:
        return doc["config"]
    if isinstance(doc, dict) and "header" in doc and "config" in doc["header"]:
        return doc["header"]["config"]
    raise InputError(f"{path}: no embedded config header")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: str, rows, config: dict):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# config: " + json.dumps(config, separators=(",", ":"),
                                           sort_keys=True) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, payload: dict, config: dict):
    payload = dict(payload)
    payload["config"] = config
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _build_params(model: str, n: int, q: float, k: Optional[int], p: int,
                  r: float, eps: Optional[float], a: Optional[float],
                  rh_local_variant: bool, undirected: bool, no_wrap: bool,
                  window_weighting: str, topology: str = "grid") -> ModelParams:
    return ModelParams(model=model, n=n, q=q, k=k, p=p, r=r, eps=eps, A=a,
                       rh_local_variant=rh_local_variant,
                       directed=not undirected, wraparound=not no_wrap,
                       topology=topology,
                       window_weighting=window_weighting).validated()


def _road_metric(road_file: str, road_format: str,
                 road_coords: Optional[str]) -> RoadMetric:
    return RoadMetric(load_road_network(road_file, fmt=road_format,
                                        coords_path=road_coords))


_model_opts = [
    click.option("--model", type=click.Choice(["kleinberg", "kh", "rh", "wnpa"]),
                 required=True, help="graph model"),
    click.option("--n", type=int, required=True, help="grid side length"),
    click.option("--q", type=float, default=1.0, show_default=True,
                 help="average long-range degree (Q)"),
    click.option("--k", type=int, default=None, help="highway parameter (KH/RH)"),
    click.option("--p", type=int, default=1, show_default=True,
                 help="local connection radius"),
    click.option("--r", type=float, default=2.0, show_default=True,
                 help="clustering exponent"),
    click.option("--eps", type=float, default=None, help="WNPA epsilon"),
    click.option("--a", "--A", "a", type=float, default=None,
                 help="WNPA window factor A"),
    click.option("--rh-local-variant", is_flag=True,
                 help="RH variant: local links into the 8 adjacent balls"),
    click.option("--undirected", is_flag=True,
                 help="treat long-range edges as undirected during routing"),
    click.option("--no-wrap", is_flag=True, help="grid without wraparound"),
    click.option("--window-weighting",
                 type=click.Choice(["inverse_square", "uniform"]),
                 default="inverse_square", show_default=True,
                 help="WNPA target weighting within the popularity window"),
]

_road_opts = [
    click.option("--road-file", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="road network file (.gr or .csv)"),
    click.option("--road-coords", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="road coordinate file (.co or .csv)"),
    click.option("--road-format", type=click.Choice(["dimacs-gr+co", "csv-edgelist"]),
                 default="dimacs-gr+co", show_default=True),
]


def _add_options(opts):
    def wrap(fn):
        for opt in reversed(opts):
            fn = opt(fn)
        return fn
    return wrap


@click.group()
def cli():
    """Small-world highway graph models and greedy routing benchmarks."""


@cli.command("generate")
@_add_options(_model_opts)
@_add_options(_road_opts)
@click.option("--seed", type=int, required=True, help="64-bit generation seed")
@click.option("--output", type=click.Path(dir_okay=False), default="graph.json",
              show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "binary"]),
              default="json", show_default=True)
@click.option("--no-timestamp", is_flag=True, help="omit the timestamp field")
def cmd_generate(model, n, q, k, p, r, eps, a, rh_local_variant, undirected,
                 no_wrap, window_weighting, road_file, road_coords,
                 road_format, seed, output, fmt, no_timestamp):
    """Generate a model instance and dump it to a file."""
    topology = "road" if road_file else "grid"
    params = _build_params(model, n, q, k, p, r, eps, a, rh_local_variant,
                           undirected, no_wrap, window_weighting, topology)
    metric = _road_metric(road_file, road_format, road_coords) if road_file else None
    g = generate(params, seed, metric=metric)
    cfg = _config_dict("generate", {
        "model": model, "n": n, "q": q, "k": k, "p": p, "r": r, "eps": eps,
        "A": a, "rh_local_variant": rh_local_variant,
        "undirected": undirected, "no_wrap": no_wrap,
        "window_weighting": window_weighting, "road_file": road_file,
        "seed": seed, "format": fmt}, no_timestamp)
    dump_graph(g, output, fmt=fmt, extra_header={"config": cfg})
    click.echo(f"wrote {output}: {g.num_nodes} nodes, "
               f"{int(g.is_highway.sum())} highway, {g.edge_count} long-range edges")


@cli.command("route")
@click.option("--model-file", type=click.Path(exists=True, dir_okay=False),
              required=True, help="graph dump produced by generate")
@click.option("--pairs", type=int, default=10_000, show_default=True)
@click.option("--policy", type=click.Choice(["kleinberg", "full_greedy",
                                             "kh_known", "kh_unknown", "rh",
                                             "wnpa_highway"]),
              default="full_greedy", show_default=True)
@click.option("--c", "c", type=float, default=1.0, show_default=True,
              help="RH final-approach constant")
@click.option("--hop-limit", type=int, default=None)
@click.option("--seed", type=int, required=True, help="trial pair seed")
@click.option("--threads", type=int, default=None,
              help="worker threads (default $HWROUTE_THREADS or 1)")
@click.option("--output", type=click.Path(dir_okay=False), default="trials.csv",
              show_default=True)
@click.option("--no-timestamp", is_flag=True)
def cmd_route(model_file, pairs, policy, c, hop_limit, seed, threads, output,
              no_timestamp):
    """Route random pairs on a generated instance; emit per-trial CSV."""
    g = load_graph(model_file)
    pol = RoutingPolicy(policy=policy, c=c, hop_limit=hop_limit).validated()
    threads = threads if threads is not None else _threads_default()
    summary, data = run_trials(g, pol, pairs, seed, threads=threads,
                               return_trials=True)
    cfg = _config_dict("route", {
        "model_file": os.path.basename(model_file), "pairs": pairs,
        "policy": policy, "c": c, "hop_limit": hop_limit, "seed": seed},
        no_timestamp)
    rows = [("src", "dst", "hops", "phase1", "phase2", "phase3", "dead_ends",
             "terminated")]
    term = np.where(data.arrived, "arrived", "failed")
    for i in range(len(data.hops)):
        rows.append((int(data.sources[i]), int(data.targets[i]),
                     int(data.hops[i]), int(data.phase_hops[i][0]),
                     int(data.phase_hops[i][1]), int(data.phase_hops[i][2]),
                     int(data.dead_ends[i]), term[i]))
    _write_csv(output, rows, cfg)
    click.echo(f"wrote {output}: mean={summary.mean:.3f} "
               f"ci=[{summary.ci_lo:.3f},{summary.ci_hi:.3f}] "
               f"failures={summary.failures}")


@cli.command("sweep")
@click.option("--model", type=click.Choice(["kh", "rh"]), required=True)
@click.option("--n", type=int, required=True)
@click.option("--q", type=float, default=1.0, show_default=True)
@click.option("--k", "k_list", type=str, required=True,
              help="comma-separated k values, e.g. 1,16,64")
@click.option("--pairs", type=int, default=10_000, show_default=True)
@click.option("--graph-seeds", type=int, default=3, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--threads", type=int, default=None)
@click.option("--output", type=click.Path(dir_okay=False), default="sweep.csv",
              show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True,
              help="render a mean-hops-vs-k figure next to the CSV")
@click.option("--no-timestamp", is_flag=True)
def cmd_sweep(model, n, q, k_list, pairs, graph_seeds, seed, threads, output,
              plot, no_timestamp):
    """Sweep the highway parameter k and emit a CSV curve (and figure)."""
    try:
        k_values = [int(x) for x in k_list.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"bad k list {k_list!r}; expected e.g. 1,16,64")
    threads = threads if threads is not None else _threads_default()
    curve = sweep_k(model, n, q, k_values, pairs, seed,
                    graph_seeds=graph_seeds, threads=threads)
    cfg = _config_dict("sweep", {
        "model": model, "n": n, "q": q, "k": k_values, "pairs": pairs,
        "graph_seeds": graph_seeds, "seed": seed}, no_timestamp)
    _write_csv(output, curve.csv_rows(), cfg)
    msgs = [f"wrote {output}: argmin k={curve.argmin_k()}"]
    if plot:
        from .report import render_sweep_figure
        fig_path = os.path.splitext(output)[0] + ".png"
        render_sweep_figure(curve, fig_path)
        msgs.append(f"figure {fig_path}")
    click.echo("; ".join(msgs))


@cli.command("compare")
@click.option("--models", "model_list", type=str, required=True,
              help="comma-separated configs, e.g. kleinberg,wnpa (first is baseline)")
@click.option("--n", type=int, required=True)
@click.option("--q", type=float, default=1.0, show_default=True)
@click.option("--k", type=int, default=None)
@click.option("--eps", type=float, default=0.5, show_default=True)
@click.option("--a", "--A", "a", type=float, default=1.01, show_default=True)
@click.option("--pairs", type=int, default=30_000, show_default=True)
@click.option("--graph-seeds", type=int, default=1, show_default=True)
@click.option("--seed", type=int, required=True)
@_add_options(_road_opts)
@click.option("--threads", type=int, default=None)
@click.option("--output", type=click.Path(dir_okay=False), default="compare.csv",
              show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
@click.option("--no-timestamp", is_flag=True)
def cmd_compare(model_list, n, q, k, eps, a, pairs, graph_seeds, seed,
                road_file, road_coords, road_format, threads, output, plot,
                no_timestamp):
    """Paired model comparison over common random pairs."""
    topology = "road" if road_file else "grid"
    metric = _road_metric(road_file, road_format, road_coords) if road_file else None
    configs = []
    for name in (x.strip() for x in model_list.split(",") if x.strip()):
        params = ModelParams(model=name, n=n, q=q, k=k,
                             eps=eps if name == "wnpa" else None,
                             A=a if name == "wnpa" else None,
                             topology=topology).validated()
        if metric is not None or name in ("kleinberg", "wnpa"):
            policy = RoutingPolicy(policy="full_greedy")
        else:
            policy = RoutingPolicy(policy="kh_known" if name == "kh" else "rh")
        configs.append((name, params, policy))
    threads = threads if threads is not None else _threads_default()
    result = compare_models(configs, pairs, seed, graph_seeds=graph_seeds,
                            metric=metric, threads=threads)
    cfg = _config_dict("compare", {
        "models": [c[0] for c in configs], "n": n, "q": q, "k": k, "eps": eps,
        "A": a, "pairs": pairs, "graph_seeds": graph_seeds, "seed": seed,
        "road_file": road_file}, no_timestamp)
    _write_csv(output, result.csv_rows(), cfg)
    msgs = [f"wrote {output}"]
    for row in result.rows[1:]:
        msgs.append(f"{row.label}/baseline={row.ratio_vs_baseline:.3f}")
    if plot:
        from .report import render_compare_figure
        fig_path = os.path.splitext(output)[0] + ".png"
        render_compare_figure(result, fig_path)
        msgs.append(f"figure {fig_path}")
    click.echo("; ".join(msgs))


@cli.command("validate")
@click.option("--lemma", type=click.Choice(["kh-norm", "rh-norm", "rh-balls",
                                            "sphere-overlap", "wnpa-degree"]),
              required=True)
@click.option("--n", type=int, required=True)
@click.option("--k", type=int, default=None)
@click.option("--q", type=float, default=1.0, show_default=True)
@click.option("--eps", type=float, default=0.5, show_default=True)
@click.option("--a", "--A", "a", type=float, default=1.01, show_default=True)
@click.option("--d", type=int, default=None, help="ball radius (sphere-overlap)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--seeds", type=int, default=20, show_default=True,
              help="number of instance seeds for multi-seed lemmas")
@click.option("--radius-class", type=click.Choice(["n", "loglog", "const"]),
              default="n", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default="lemma.json",
              show_default=True)
@click.option("--no-timestamp", is_flag=True)
def cmd_validate(lemma, n, k, q, eps, a, d, seed, seeds, radius_class, output,
                 no_timestamp):
    """Check one of the numeric lemma suites; emit a JSON report."""
    if lemma == "kh-norm":
        if k is None:
            raise ParameterError("kh-norm requires --k")
        report = validation.kh_norm_report(n, k)
    elif lemma == "rh-norm":
        if k is None:
            raise ParameterError("rh-norm requires --k")
        report = validation.rh_norm_report(n, k, [seed + i for i in range(seeds)],
                                           q=q)
    elif lemma == "rh-balls":
        if k is None:
            raise ParameterError("rh-balls requires --k")
        reports = []
        for i in range(seeds):
            g = generate(ModelParams(model="rh", n=n, k=k, q=q), seed + i)
            reports.append(validation.check_ball_counts(g, radius_class))
        total_viol = sum(r.violations for r in reports)
        report = validation.LemmaReport(
            lemma=f"rh-balls-{radius_class}",
            instance={"n": n, "k": k, "seeds": seeds},
            observed={"per_seed": [r.observed for r in reports]},
            bounds=reports[0].bounds,
            passed=all(r.passed for r in reports),
            violations=total_viol,
            checked=sum(r.checked for r in reports),
            budget=reports[0].budget)
    elif lemma == "sphere-overlap":
        if d is None:
            raise ParameterError("sphere-overlap requires --d")
        report = validation.check_sphere_overlap(n, d)
    else:
        report = validation.wnpa_degree_report(n, q, eps, a, seed)
    cfg = _config_dict("validate", {
        "lemma": lemma, "n": n, "k": k, "q": q, "eps": eps, "A": a, "d": d,
        "seed": seed, "seeds": seeds, "radius_class": radius_class},
        no_timestamp)
    _write_json(output, report.to_dict(), cfg)
    click.echo(f"wrote {output}: {'PASS' if report.passed else 'FAIL'} "
               f"({report.violations} violations / {report.checked} checks)")


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        return 130
    except click.exceptions.ClickException as exc:
        exc.show()
        return 2
    except (ParameterError, InputError, GenerationError,
            RoutingPolicyError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return 3
    except (InvariantError, AssertionError) as exc:
        click.echo(f"internal invariant breach: {exc}", err=True)
        return 4


if __name__ == "__main__":
    sys.exit(main())
