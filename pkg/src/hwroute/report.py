"""Figure rendering for sweep and comparison reports.

Figures are written next to the delimited output (same stem, ``.png``):
sweeps get a mean-hops-vs-k curve with CI band on a log-x axis; comparisons
get paired bars, linear and log scale side by side.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import ComparisonResult, SweepCurve

__all__ = ["render_sweep_figure", "render_compare_figure"]


def render_sweep_figure(curve: SweepCurve, path: str):
    ks = [p.k for p in curve.points]
    means = [p.summary.mean for p in curve.points]
    lo = [p.summary.ci_lo for p in curve.points]
    hi = [p.summary.ci_hi for p in curve.points]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ks, means, "o-", color="tab:blue", lw=1.5)
    ax.fill_between(ks, lo, hi, color="tab:blue", alpha=0.25, lw=0)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("k")
    ax.set_ylabel("mean greedy routing hops")
    ax.set_title(f"{curve.model.upper()} sweep, n={curve.n}, Q={curve.q}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_compare_figure(result: ComparisonResult, path: str):
    labels = [r.label for r in result.rows]
    means = [r.summary.mean for r in result.rows]
    err = [[r.summary.mean - r.summary.ci_lo for r in result.rows],
           [r.summary.ci_hi - r.summary.mean for r in result.rows]]
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    for ax, logscale in zip(axes, (False, True)):
        ax.bar(labels, means, yerr=err, capsize=4,
               color=["tab:gray"] + ["tab:green"] * (len(labels) - 1))
        if logscale:
            ax.set_yscale("log")
            ax.set_title("log scale")
        ax.set_ylabel("mean greedy routing hops")
        ax.tick_params(axis="x", rotation=20)
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
