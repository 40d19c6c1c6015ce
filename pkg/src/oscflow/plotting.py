"""Matplotlib figures rendered next to the CSV artifacts of a run.

The CSVs remain the primary, regression-tested outputs; these figures are a
convenience rendering of the same data.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_monitors(monitor_rows: list, diff_norms: list, path: str) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    if monitor_rows:
        keys = [k for k in monitor_rows[0] if k != "n"]
        ns = [row["n"] for row in monitor_rows]
        for key in keys:
            ax1.plot(ns, [row[key] for row in monitor_rows], marker="o", label=key)
        ax1.set_xlabel("iterate")
        ax1.set_ylabel("monitor")
        ax1.set_yscale("log")
        ax1.legend(fontsize=7)
    if diff_norms:
        ax2.semilogy(range(1, len(diff_norms) + 1), diff_norms, marker="s")
        ax2.set_xlabel("iterate")
        ax2.set_ylabel("weighted successive difference")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_residuals(times: list, residuals: list, path: str) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.loglog(times, np.maximum(residuals, 1e-300), marker="o")
    ax.set_xlabel("t")
    ax.set_ylabel("mild-equation residual")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_radius(rows: list, path: str) -> None:
    """rows: dicts with t, delta_hat and the fitted lower-envelope value."""
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ts = [r["t"] for r in rows]
    ax.plot(ts, [r["delta_hat"] for r in rows], marker="o", label="estimated radius")
    if rows and "envelope" in rows[0]:
        ax.plot(ts, [r["envelope"] for r in rows], "--", label="c sqrt(t) Phi2(t)")
    ax.set_xlabel("t")
    ax.set_ylabel("radius")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_weight_table(t_grid: np.ndarray, columns: dict, path: str) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for name, vals in columns.items():
        ax.loglog(t_grid, vals, label=name)
    ax.set_xlabel("t")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
