"""Figure rendering for the report commands.

Figures are drawn on bare ``Figure`` objects with the Agg canvas, so nothing
here touches pyplot state or needs a display.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

FONT_SIZE = 9


def _figure(ncols: int = 1, width: float = 4.0, height: float = 3.0):
    fig = Figure(figsize=(width * ncols, height), dpi=110)
    FigureCanvasAgg(fig)
    axes = fig.subplots(1, ncols, squeeze=False)[0]
    for ax in axes:
        ax.spines["top"].set_visible(False)
        ax.spines["right"].set_visible(False)
        ax.tick_params(labelsize=FONT_SIZE)
    return fig, axes


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    return path


def plot_training_curves(history, path, title: str = "") -> Path:
    """Training loss and validation loss/AUC per epoch."""
    epochs = [r.epoch for r in history]
    fig, (ax_loss, ax_auc) = _figure(2)
    ax_loss.plot(epochs, [r.loss.total for r in history], label="train")
    ax_loss.plot(epochs, [r.val_loss for r in history], label="validation")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("loss")
    ax_loss.legend(frameon=False)
    ax_auc.plot(epochs, [r.val_auc for r in history], color="C2")
    ax_auc.set_xlabel("epoch")
    ax_auc.set_ylabel("validation AUC")
    if title:
        fig.suptitle(title)
    return _save(fig, path)


def plot_subgraph_analysis(analysis: dict, path) -> Path:
    """Correlation heatmap, per-subgraph vs aggregate AUC, and the gradual curve."""
    fig, (ax_r, ax_auc, ax_grad) = _figure(3, width=3.4)
    r = np.array([[np.nan if v is None else v for v in row] for row in analysis["pearson"]], dtype=float)
    im = ax_r.imshow(r, vmin=-1, vmax=1, cmap="coolwarm")
    fig.colorbar(im, ax=ax_r, fraction=0.046)
    ax_r.set_title(f"Pearson (mean {analysis['mean_pairwise_pearson']:.3f})")
    ax_r.set_xlabel("subgraph")
    ax_r.set_ylabel("subgraph")

    per = analysis["per_subgraph_auc"]
    ax_auc.bar(np.arange(1, len(per) + 1), per, color="C0")
    ax_auc.axhline(analysis["aggregate_auc"], color="C3", label="aggregate")
    ax_auc.axhline(analysis["ensemble_auc"], color="k", ls=":", label="ensemble")
    ax_auc.set_ylim(max(0.0, min(per + [analysis["ensemble_auc"]]) - 0.05), 1.0)
    ax_auc.set_xlabel("subgraph")
    ax_auc.set_ylabel("test AUC")
    ax_auc.legend(frameon=False, fontsize=7)

    gradual = analysis["gradual_auc"]
    ax_grad.plot(np.arange(1, len(gradual) + 1), gradual, marker="o")
    ax_grad.set_xlabel("subgraphs aggregated")
    ax_grad.set_ylabel("test AUC")
    return _save(fig, path)


def plot_compare(summary: list[dict], path) -> Path:
    """Mean test AUC and AP per configuration with one-std error bars."""
    labels = [row["name"] for row in summary]
    x = np.arange(len(labels))
    fig, axes = _figure(2, width=max(3.0, 0.8 * len(labels) + 1.5))
    for ax, metric in zip(axes, ("auc", "ap")):
        mean = np.array([row[f"{metric}_mean"] for row in summary]) * 100
        std = np.array([row[f"{metric}_std"] for row in summary]) * 100
        ax.bar(x, mean, yerr=std, capsize=3, color="C0")
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=30, ha="right")
        ax.set_ylabel(f"test {metric.upper()} (%)")
        lo = float(np.min(mean - std)) if len(mean) else 0.0
        ax.set_ylim(max(0.0, lo - 5), 100)
    return _save(fig, path)
