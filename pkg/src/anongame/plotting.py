"""Figures for the benchmark and diagnostic commands, written to PNG files."""

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.linewidth": 0.6,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "legend.frameon": False,
    "savefig.bbox": "tight",
}


def _save(fig, out_dir, name):
    path = os.path.join(out_dir, name)
    fig.savefig(path)
    plt.close(fig)
    return path


def _series(rows, key, x, y):
    groups = defaultdict(list)
    for r in rows:
        if r.get(y) is None:
            continue
        groups[key(r)].append((r[x], r[y]))
    return {g: sorted(v) for g, v in sorted(groups.items())}


def _mean_by_x(points):
    acc = defaultdict(list)
    for x, y in points:
        acc[x].append(y)
    xs = sorted(acc)
    return xs, [sum(acc[x]) / len(acc[x]) for x in xs], [max(acc[x]) for x in xs]


def plot_bench(rows, out_dir):
    """Regret against its guarantee, and runtime, as functions of ``n``."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        label = lambda r: f"{r['algo']} k={r['k']}"
        for (name, pts), color in zip(_series(rows, label, "n", "regret").items(), plt.cm.tab10.colors):
            xs, mean, worst = _mean_by_x(pts)
            ax.plot(xs, worst, "o-", color=color, label=f"{name} max regret")
            ax.plot(xs, mean, ".:", color=color)
        for (name, pts), color in zip(_series(rows, label, "n", "bound").items(), plt.cm.tab10.colors):
            xs, mean, _ = _mean_by_x(pts)
            ax.plot(xs, mean, "--", color=color, alpha=0.6, label=f"{name} guarantee")
        ax.set_xlabel("players n")
        ax.set_ylabel("regret")
        ax.legend(fontsize=7)
        paths.append(_save(fig, out_dir, "bench_regret.png"))

        fig, ax = plt.subplots()
        for name, pts in _series(rows, label, "n", "runtime_s").items():
            xs, mean, _ = _mean_by_x(pts)
            ax.plot(xs, mean, "o-", label=name)
        ax.set_yscale("log")
        ax.set_xlabel("players n")
        ax.set_ylabel("seconds per game")
        ax.legend(fontsize=7)
        paths.append(_save(fig, out_dir, "bench_runtime.png"))
    return paths


def plot_diag(results, out_dir):
    """One figure per trend-style diagnostic."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    with plt.rc_context(STYLE):
        rep = results.get("representative")
        if rep:
            fig, ax = plt.subplots()
            xs, _, worst = _mean_by_x([(r["n"], r["tv"]) for r in rep])
            _, _, gaps = _mean_by_x([(r["n"], r["moment_gap"]) for r in rep])
            eps = sorted({(r["n"], r["eps"]) for r in rep})
            ax.plot(xs, worst, "o-", label="max TV, equal data")
            ax.plot(xs, gaps, "s-", label="max moment gap")
            ax.plot([e[0] for e in eps], [e[1] for e in eps], "k--", label="n^-c")
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel("players n")
            ax.legend(fontsize=7)
            paths.append(_save(fig, out_dir, "diag_representative.png"))
        gauss = results.get("gaussian")
        if gauss:
            fig, ax = plt.subplots()
            for name, pts in _series(gauss, lambda r: f"k={r['k']}", "n", "tv").items():
                ax.plot(*zip(*pts), "o-", label=name)
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel("players n")
            ax.set_ylabel("TV to discretized Gaussian")
            ax.legend(fontsize=7)
            paths.append(_save(fig, out_dir, "diag_gaussian.png"))
        lip = results.get("lipschitz")
        if lip:
            fig, ax = plt.subplots()
            key = lambda r: f"k={r['k']} delta={'default' if r.get('default') else r['delta']}"
            for name, pts in _series(lip, key, "n", "lipschitz").items():
                ax.plot(*zip(*pts), "o-", label=name)
            ax.set_xlabel("players n")
            ax.set_ylabel("measured Lipschitz constant")
            ax.legend(fontsize=7)
            paths.append(_save(fig, out_dir, "diag_lipschitz.png"))
    return paths
