"""Figure rendering.

Figures are pure views: every number they draw is written first to a CSV
next to the image, and acceptance checks read only the CSVs. The renderer
here is matplotlib but nothing downstream depends on it.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def boxplot(path, groups: dict, ylabel: str, ref_line: float | None = None):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.boxplot(list(groups.values()), tick_labels=list(groups.keys()))
    if ref_line is not None:
        ax.axhline(ref_line, color="gray", linestyle="--", linewidth=1)
    ax.set_ylabel(ylabel)
    _finish(fig, path)


def histogram(path, values, xlabel: str, ref_line: float | None = None):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.hist(np.asarray(values), bins=12, color="steelblue", edgecolor="white")
    if ref_line is not None:
        ax.axvline(ref_line, color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("replicates")
    _finish(fig, path)


def bo_trace(path, rounds, values, running_best, init_n: int):
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    rounds = np.asarray(rounds)
    values = np.asarray(values)
    init = rounds <= init_n
    ax.scatter(rounds[init], values[init], color="gray", label="initial design")
    ax.scatter(rounds[~init], values[~init], color="steelblue", label="acquisition")
    ax.step(rounds, running_best, where="post", color="darkorange", label="running best")
    ax.set_xlabel("round")
    ax.set_ylabel("objective value")
    ax.legend(loc="lower right", fontsize=8)
    _finish(fig, path)


def bo_landscape(path, x, y, values, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    sc = ax.scatter(x, y, c=values, cmap="viridis", s=45, edgecolor="black", linewidth=0.4)
    fig.colorbar(sc, ax=ax, label="objective value")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    _finish(fig, path)


def roc_curve(path, fpr, tpr, auc_value: float):
    fig, ax = plt.subplots(figsize=(4.2, 4.0))
    ax.plot(fpr, tpr, color="steelblue")
    ax.plot([0, 1], [0, 1], color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title(f"AUC = {auc_value:.3f}", fontsize=10)
    _finish(fig, path)


def calibration_curve(path, mean_predicted, observed, counts):
    fig, ax = plt.subplots(figsize=(4.2, 4.0))
    sizes = 20 + 180 * np.asarray(counts) / max(np.max(counts), 1)
    ax.scatter(mean_predicted, observed, s=sizes, color="steelblue", edgecolor="black",
               linewidth=0.4)
    ax.plot([0, 1], [0, 1], color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel("mean predicted risk")
    ax.set_ylabel("observed proportion")
    _finish(fig, path)
