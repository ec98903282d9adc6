"""Figure rendering for replay and evaluation reports.

All figures are written to files; nothing is shown interactively.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import networkx as nx

from .evaluation import MetricsRow
from .model import Topology
from .session import StepResult


def _layout(t: Topology):
    g = nx.Graph()
    g.add_nodes_from(sorted(t.routers))
    for l in t.links:
        g.add_edge(l.src, l.dst)
    return g, nx.spring_layout(g, seed=7)


def plot_topology(t: Topology, result: StepResult, path: str) -> None:
    """Draw routers, links, and DCs with each user's route highlighted."""
    g, pos = _layout(t)
    fig, ax = plt.subplots(figsize=(7, 5))
    nx.draw_networkx_edges(g, pos, ax=ax, edge_color="#cccccc")
    dc_routers = {d.router: d.id for d in t.datacenters}
    node_colors = ["#d95f02" if n in dc_routers else "#7570b3" for n in g.nodes]
    nx.draw_networkx_nodes(g, pos, ax=ax, node_color=node_colors, node_size=350)
    labels = {n: (f"{n}\nDC{dc_routers[n]}" if n in dc_routers else str(n))
              for n in g.nodes}
    nx.draw_networkx_labels(g, pos, labels=labels, ax=ax, font_size=8)

    if result.allocation is not None:
        cmap = plt.get_cmap("tab10")
        for i, (uid, route) in enumerate(sorted(result.allocation.routes.items())):
            edges = [(t.link(lid).src, t.link(lid).dst) for lid in route]
            nx.draw_networkx_edges(
                g, pos, edgelist=edges, ax=ax, width=2.5,
                edge_color=[cmap(i % 10)] * len(edges),
                label=f"user {uid}")
    title = f"step {result.step}: {result.status}"
    if result.status != "Optimal":
        title += " (previous allocation retained)"
    ax.set_title(title)
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_timelines(results: list[StepResult], path: str) -> None:
    """Per-user series of latency bound vs actual latency and CPU parameter
    vs actual CPU across chat steps."""
    uids = sorted({uid for r in results for uid in r.params_after})
    fig, (ax_lat, ax_cpu) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    steps = [r.step for r in results]
    for uid in uids:
        bounds = [r.params_after[uid].latency_bound for r in results]
        cpus = [r.params_after[uid].cpu_param for r in results]
        lat = [r.measurement.actual_latency.get(uid) if r.measurement else None
               for r in results]
        actual_cpu = [r.measurement.actual_cpu.get(uid) if r.measurement else None
                      for r in results]
        ax_lat.plot(steps, bounds, marker="o", label=f"user {uid} bound")
        ax_lat.plot(steps, lat, marker="x", linestyle="--",
                    label=f"user {uid} actual")
        ax_cpu.plot(steps, cpus, marker="o", label=f"user {uid} param")
        ax_cpu.plot(steps, actual_cpu, marker="x", linestyle="--",
                    label=f"user {uid} actual")
    ax_lat.set_ylabel("latency [ms]")
    ax_cpu.set_ylabel("CPU [cores]")
    ax_cpu.set_xlabel("chat step")
    for ax in (ax_lat, ax_cpu):
        ax.legend(fontsize=7)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_metrics(rows: list[MetricsRow], path: str) -> None:
    """Bar chart of the per-topic rates across training sizes."""
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.5), sharey=True)
    sizes = [str(r.train_size) for r in rows]
    panels = [("precision", lambda r: r.precision),
              ("recall", lambda r: r.recall),
              ("balanced accuracy", lambda r: r.balanced_accuracy)]
    width = 0.35
    for ax, (name, get) in zip(axes, panels):
        cpu = [get(r)[0] if get(r)[0] is not None else 0.0 for r in rows]
        lb = [get(r)[1] if get(r)[1] is not None else 0.0 for r in rows]
        xs = range(len(rows))
        ax.bar([x - width / 2 for x in xs], cpu, width, label="cpu")
        ax.bar([x + width / 2 for x in xs], lb, width, label="latency bound")
        ax.set_xticks(list(xs), sizes)
        ax.set_title(name)
        ax.set_xlabel("train size")
        ax.set_ylim(0, 1.05)
    axes[0].set_ylabel("rate")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_replay_figures(t: Topology, results: list[StepResult],
                          out_dir: str) -> list[str]:
    """Topology figure per step plus the parameter timelines."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for r in results:
        p = os.path.join(out_dir, f"step_{r.step}.png")
        plot_topology(t, r, p)
        paths.append(p)
    p = os.path.join(out_dir, "timelines.png")
    plot_timelines(results, p)
    paths.append(p)
    return paths
