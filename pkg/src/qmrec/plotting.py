"""Figure rendering for the benchmark reports (PNG files next to the CSV)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_LABELS = {"exponential": "exponential-type GD", "plain": "gradient descent"}


def plot_phase_transition(rows: list[dict], out_path: str | Path) -> Path:
    """Success rate vs m/(n*r), one curve per variant."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    variants = sorted({row["variant"] for row in rows})
    for variant in variants:
        sub = sorted((r for r in rows if r["variant"] == variant), key=lambda r: r["m"])
        ax.plot(
            [r["m_over_nr"] for r in sub],
            [r["success_rate"] for r in sub],
            marker="o",
            label=_LABELS.get(variant, variant),
        )
    ax.set_xlabel("m / (n r)")
    ax.set_ylabel("empirical success rate")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_convergence(rows: list[dict], out_path: str | Path) -> Path:
    """Relative error vs iteration, one curve per (variant, alpha, seed)."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    keys = sorted({(r["variant"], r["alpha"], r["seed_index"]) for r in rows})
    for variant, alpha, seed in keys:
        sub = [
            r for r in rows
            if (r["variant"], r["alpha"], r["seed_index"]) == (variant, alpha, seed)
        ]
        sub.sort(key=lambda r: r["iteration"])
        label = f"{_LABELS.get(variant, variant)}, alpha={alpha:g}"
        if len(keys) > len({(k[0], k[1]) for k in keys}):
            label += f", seed {seed}"
        ax.semilogy(
            [r["iteration"] for r in sub],
            [max(r["relative_error"], 1e-300) for r in sub],
            label=label,
        )
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative error")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_init_quality(per_m: list[dict], out_path: str | Path) -> Path:
    """Initialization quality trend vs m."""
    out_path = Path(out_path)
    fig, ax1 = plt.subplots(figsize=(5.5, 4))
    ms = [row["m"] for row in per_m]
    ax1.plot(ms, [row["median_d0_sq_over_sigma_r"] for row in per_m], "o-", color="tab:blue")
    ax1.set_xlabel("m")
    ax1.set_ylabel("median d(U0)^2 / sigma_r", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(ms, [row["basin_fraction"] for row in per_m], "s--", color="tab:orange")
    ax2.set_ylabel("basin-hit fraction", color="tab:orange")
    ax2.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
