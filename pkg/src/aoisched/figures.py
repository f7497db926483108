"""Figure rendering for the report-producing CLI paths.

All functions write PNG files next to the delimited output; nothing is shown
interactively (the Agg backend is forced so rendering works headless).
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .core import SimTrace


def render_ratio_sweep(rows: Sequence[dict], out_path, title: str) -> None:
    """Cost ratio vs. construction period, with the worst-case bound drawn in."""
    deltas = [row["delta"] for row in rows]
    ratios = [row["ratio"] for row in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(deltas, ratios, marker="o", label="policy / optimal cost")
    if rows:
        bound = rows[0]["bound"]
        ax.axhline(bound, color="crimson", linestyle="--", label=f"bound {bound:.4g}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("construction period")
    ax.set_ylabel("cost ratio")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_stochastic(summaries: Sequence[dict], out_path, title: str) -> None:
    """Mean per-user age and cost ratio of the two policies vs. Good probability."""
    ps = [s["p"] for s in summaries]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.6, 4.2))
    ax1.plot(ps, [s["mean_avg_age_csit"] for s in summaries], marker="o",
             label="channel-aware max-age")
    ax1.plot(ps, [s["mean_avg_age_oblivious"] for s in summaries], marker="s",
             label="channel-oblivious max-age")
    ax1.set_xlabel("P(channel Good)")
    ax1.set_ylabel("mean per-user age")
    ax1.grid(True, alpha=0.3)
    ax1.legend()
    ax2.plot(ps, [s["mean_ratio"] for s in summaries], marker="o", color="seagreen")
    ax2.set_xlabel("P(channel Good)")
    ax2.set_ylabel("oblivious / channel-aware cost")
    ax2.grid(True, alpha=0.3)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_age_timelines(sim: SimTrace, opt_sim: SimTrace, out_path, title: str) -> None:
    """Per-user age trajectories of a policy run and the optimum's run."""
    horizon = sim.channel.horizon
    n = sim.channel.num_users
    slots = list(range(1, horizon + 1))
    fig, axes = plt.subplots(n, 1, figsize=(7.2, 1.9 * n), sharex=True, squeeze=False)
    for u in range(n):
        ax = axes[u][0]
        ax.step(slots, [r.pre_ages[u] for r in sim.records], where="mid",
                label="policy" if u == 0 else None)
        ax.step(slots, [r.pre_ages[u] for r in opt_sim.records], where="mid",
                linestyle="--", label="optimal" if u == 0 else None)
        ax.set_ylabel(f"user {u} age")
        ax.grid(True, alpha=0.3)
    axes[0][0].legend(loc="upper left")
    axes[-1][0].set_xlabel("slot")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
