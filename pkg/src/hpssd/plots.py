"""Static SVG figures rendered from a results table and its report."""

from __future__ import annotations

import os

import numpy as np

from .evaluation import QUARTILE_LABELS, EvaluationReport
from .recruitment import SCENARIO_TAGS


def _axes(path, title, xlabel, ylabel):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return plt, fig, ax


def plot_phi_density(results, path) -> None:
    """Joint density of outcome vs degree assortativity across runs."""
    pairs = [
        (res.phi_y, res.phi_k)
        for res in results
        if res.phi_y is not None and res.phi_k is not None
    ]
    data = np.array(pairs, dtype=np.float64)
    plt, fig, ax = _axes(path, "Assortativity across runs", "phi_y", "phi_k")
    if len(data):
        hb = ax.hexbin(data[:, 0], data[:, 1], gridsize=30, cmap="viridis", mincnt=1)
        fig.colorbar(hb, ax=ax, label="runs")
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_quartile_bars(report: EvaluationReport, statistic, path) -> None:
    """Grouped bars of one quartile table, one group per homophily quartile."""
    table = {
        "improvement": report.improvement,
        "win_rate": report.win_rates,
        "debiased_win_rate": report.debiased_win_rates,
    }[statistic]
    plt, fig, ax = _axes(path, statistic.replace("_", " "), "homophily quartile", statistic)
    x = np.arange(len(QUARTILE_LABELS))
    width = 0.8 / len(SCENARIO_TAGS)
    for k, tag in enumerate(SCENARIO_TAGS):
        heights = [
            table[tag][label] if table[tag][label] is not None else 0.0
            for label in QUARTILE_LABELS
        ]
        ax.bar(x + (k - 1.5) * width, heights, width, label=f"scenario {tag}")
    ax.set_xticks(x, QUARTILE_LABELS)
    ax.legend()
    if statistic != "improvement":
        ax.axhline(0.5, linestyle="--", linewidth=0.8, color="grey")
    fig.savefig(path, format="svg")
    plt.close(fig)


def write_plots(results, report: EvaluationReport | None, out_dir):
    """Render every figure; returns the list of written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    phi_path = os.path.join(out_dir, "phi_density.svg")
    plot_phi_density(results, phi_path)
    paths.append(phi_path)
    if report is not None:
        for statistic in ("improvement", "win_rate", "debiased_win_rate"):
            path = os.path.join(out_dir, f"{statistic}_by_quartile.svg")
            plot_quartile_bars(report, statistic, path)
            paths.append(path)
    return paths
