"""Figure rendering for the CLI report paths.

Figures are companions to the CSV artifacts, written next to them; the
CSVs stay the authoritative, diffable outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .model import ValueTable

__all__ = ["plot_value_table", "plot_tradeoff", "plot_safe_sets",
           "plot_pedagogical"]


def plot_value_table(table: ValueTable, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    if len(table.axes) == 1:
        ax.plot(table.axes[0], table.values, lw=1.5)
        ax.set_xlabel("x")
        ax.set_ylabel("value")
    else:
        mesh = ax.pcolormesh(table.axes[0], table.axes[1],
                             table.values.T, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="value")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_tradeoff(rows_by_x0: dict, path, kind: str) -> None:
    """Trade-off curves per initial condition.

    kind 'eu': mean vs variance as the aversion parameter sweeps.
    kind 'cvar': VaR vs expected exceedance at each row's own level.
    """
    fig, ax = plt.subplots(figsize=(6, 4))
    for x0, rows in rows_by_x0.items():
        if kind == "cvar":
            xs = [r.stats.var_at[r.parameter] for r in rows]
            ys = [r.stats.exceedance_at[r.parameter] for r in rows]
            ax.set_xlabel("VaR of cost")
            ax.set_ylabel("expected exceedance")
        else:
            xs = [r.stats.mean for r in rows]
            ys = [r.stats.variance for r in rows]
            ax.set_xlabel("mean cost")
            ax.set_ylabel("cost variance")
        ax.plot(xs, ys, "o-", ms=4, label=f"x0={x0}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_safe_sets(values: ValueTable, masks_by_r: dict, path,
                   title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    if len(values.axes) == 1:
        x = values.axes[0]
        ax.plot(x, values.values, "k-", lw=1.2, label="value")
        for i, (r, mask) in enumerate(sorted(masks_by_r.items())):
            ax.axhline(r, color=f"C{i}", lw=0.8, ls="--")
            inside = np.where(mask, r, np.nan)
            ax.plot(x, inside, color=f"C{i}", lw=3,
                    label=f"safe at r={r:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("value / threshold")
        ax.legend(fontsize=8)
    else:
        x1, x2 = values.axes
        mesh = ax.pcolormesh(x1, x2, values.values.T, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="value")
        for i, (r, mask) in enumerate(sorted(masks_by_r.items())):
            ax.contour(x1, x2, mask.T.astype(float), levels=[0.5],
                       colors=[f"C{i}"], linewidths=1.5)
            ax.plot([], [], color=f"C{i}", label=f"r={r:g}")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_pedagogical(rows: list[dict], path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    u = [r["u"] for r in rows]
    ce_keys = sorted(k for k in rows[0] if k.startswith("ce_"))
    cvar_keys = sorted(k for k in rows[0] if k.startswith("cvar_"))
    for k in ce_keys:
        axes[0].plot(u, [r[k] for r in rows], label=k.replace("_", "="))
    axes[0].set_xlabel("u")
    axes[0].set_ylabel("certainty equivalent")
    axes[0].legend(fontsize=8)
    for k in cvar_keys:
        axes[1].plot(u, [r[k] for r in rows], label=k.replace("_", "="))
    axes[1].set_xlabel("u")
    axes[1].set_ylabel("CVaR of cost")
    axes[1].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
