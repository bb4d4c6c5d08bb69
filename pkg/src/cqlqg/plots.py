"""Figure rendering for the report path (written next to the CSV output)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_trajectory_figure(path, traj):
    """Traces of the Gramians, gain norms and running cost over time."""
    t = traj.grid.times
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))

    axes[0].plot(t, np.trace(traj.P, axis1=1, axis2=2), label="tr P")
    axes[0].plot(t, np.trace(traj.Q, axis1=1, axis2=2), label="tr Q")
    axes[0].set_xlabel("t")
    axes[0].set_title("Gramian traces")
    axes[0].legend()

    axes[1].plot(t, np.linalg.norm(traj.gains.b, axis=(1, 2)), label="|b|")
    axes[1].plot(t, np.linalg.norm(traj.gains.e, axis=(1, 2)), label="|e|")
    axes[1].set_xlabel("t")
    axes[1].set_title("Gain norms")
    axes[1].legend()

    axes[2].plot(t, traj.cost_to_date)
    axes[2].set_xlabel("t")
    axes[2].set_title(f"Cost to date (total {traj.cost:.6g})")

    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_cost_history_figure(path, history):
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(range(1, len(history) + 1), history, marker="o", markersize=3)
    ax.set_xlabel("iteration")
    ax.set_ylabel("LQG cost")
    ax.set_title("Fixed-point cost history")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_checks_figure(path, results):
    """Residual-to-tolerance ratios per check on a log axis."""
    names = [r.name for r in results]
    ratios = [max(r.residual, 1e-18) / max(r.tolerance, 1e-18) for r in results]
    colors = ["tab:green" if r.passed else "tab:red" for r in results]
    fig, ax = plt.subplots(figsize=(7, 0.32 * len(names) + 1.2))
    ax.barh(range(len(names)), ratios, color=colors)
    ax.axvline(1.0, color="k", linewidth=0.8, linestyle="--")
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=7)
    ax.set_xscale("log")
    ax.set_xlabel("residual / tolerance")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_validation_figure(path, rows):
    """Per-node PR residuals on a log axis."""
    nodes = [r["node"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.4))
    for key in ("res11", "res12", "controller_res1", "controller_res2"):
        if key in rows[0]:
            ax.semilogy(nodes, [max(r[key], 1e-20) for r in rows], label=key)
    ax.set_xlabel("node")
    ax.set_ylabel("residual")
    ax.set_title("PR residuals")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_standard_figures(out_dir, traj=None, report=None, checks=None):
    written = []
    if traj is not None:
        p = os.path.join(out_dir, "trajectory.png")
        save_trajectory_figure(p, traj)
        written.append(p)
    if report is not None and report.cost_history:
        p = os.path.join(out_dir, "cost_history.png")
        save_cost_history_figure(p, report.cost_history)
        written.append(p)
    if checks:
        p = os.path.join(out_dir, "checks.png")
        save_checks_figure(p, checks)
        written.append(p)
    return written
