"""Figure rendering for the CLI report paths (written next to the data files)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def training_curves(metrics: list[dict], path: str | Path) -> Path:
    """Loss components and view weights across epochs."""
    epochs = [m["epoch"] for m in metrics]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.6))
    ax1.plot(epochs, [m["total"] for m in metrics], label="total", lw=1.2)
    ax1.plot(epochs, [m["L_GD"] for m in metrics], label="group", lw=0.9)
    ax1.plot(epochs, [m["L_hop"] for m in metrics], label="hop", lw=0.9)
    ax1.plot(epochs, [m["L_degree"] for m in metrics], label="degree", lw=0.9)
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("loss")
    ax1.legend(fontsize=8)
    lam = list(zip(*[m["lambda"] for m in metrics]))
    for k, series in enumerate(lam, start=1):
        ax2.plot(epochs, series, label=f"hop {k}", lw=1.0)
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("view weight")
    ax2.set_ylim(0, 1)
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def separation_curve(scores: list[tuple[int, float]], homophily: float,
                     path: str | Path) -> Path:
    hops = [k for k, _ in scores]
    vals = [s for _, s in scores]
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.plot(hops, vals, marker="o")
    ax.set_xlabel("hop")
    ax.set_ylabel("pos/neg separation")
    ax.set_title(f"homophily = {homophily:.2f}", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def ablation_bars(rows: list[dict], path: str | Path) -> Path:
    names = [r["name"] for r in rows]
    means = [100 * r["mean"] for r in rows]
    stds = [100 * r["std"] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 3.6))
    ax.bar(range(len(rows)), means, yerr=stds, capsize=3, color="#4878a8")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("probe accuracy (%)")
    low = min(m - s for m, s in zip(means, stds))
    high = max(m + s for m, s in zip(means, stds))
    pad = max(0.5, 0.2 * (high - low))
    ax.set_ylim(low - pad, high + pad)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def bench_bars(report: dict, path: str | Path) -> Path:
    keys = ["train_ms_per_epoch", "precompute_ms", "gcn_forward_ms", "infer_ms"]
    labels = ["train / epoch", "precompute", "gcn forward", "infer"]
    vals = [report[k] for k in keys]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.barh(labels, vals, color="#60a060")
    ax.set_xlabel("ms (median)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
