"""Figure rendering for the CLI report paths.

Each renderer draws to an in-memory PNG and hands the bytes to the atomic
writer, so figures follow the same no-partial-output rule as the delimited
files they accompany.
"""

from __future__ import annotations

import io
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fileio import write_bytes
from .importance import ImportanceRanking

_DPI = 150


def _save(fig, path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    write_bytes(path, buf.getvalue())


def plot_form_distribution(form_pct: Mapping[str, float], title: str, path) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 3))
    labels = list(form_pct)
    values = [form_pct[k] for k in labels]
    ax.bar(labels, values, color="#4878b0")
    ax.set_ylabel("% of mentions")
    ax.set_title(title)
    for i, v in enumerate(values):
        ax.text(i, v, f"{v:.1f}", ha="center", va="bottom", fontsize=8)
    _save(fig, path)


def plot_importance(ranking: ImportanceRanking, title: str, path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 0.45 * len(ranking.entries) + 1.2))
    names = [name for name, _, _ in ranking.entries][::-1]
    means = [mean for _, mean, _ in ranking.entries][::-1]
    ax.barh(names, means, color="#4878b0")
    for i, (_, _, repeats) in enumerate(reversed(ranking.entries)):
        ax.plot(repeats, [i] * len(repeats), ".", color="#333333", markersize=3)
    ax.set_xlabel(f"drop in {ranking.metric}")
    ax.set_title(title)
    _save(fig, path)


def plot_correlation_grid(
    pairs: Sequence[str], metrics: Sequence[str], values: np.ndarray,
    title: str, path,
) -> None:
    """Annotated grid of correlation coefficients (pairs x metrics)."""
    fig, ax = plt.subplots(figsize=(1.2 * len(metrics) + 2, 0.7 * len(pairs) + 1.5))
    im = ax.imshow(values, cmap="RdBu", vmin=-1.0, vmax=1.0)
    ax.set_xticks(range(len(metrics)), metrics)
    ax.set_yticks(range(len(pairs)), pairs)
    for i in range(len(pairs)):
        for j in range(len(metrics)):
            ax.text(j, i, f"{values[i, j]:.4f}", ha="center", va="center", fontsize=8)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title(title)
    _save(fig, path)


def plot_confusion(matrix: np.ndarray, labels: Sequence[str], title: str, path) -> None:
    """Annotated gold-by-predicted count grid."""
    fig, ax = plt.subplots(figsize=(4, 3.5))
    im = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(len(labels)), labels, rotation=30, ha="right")
    ax.set_yticks(range(len(labels)), labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("gold")
    threshold = matrix.max() / 2 if matrix.max() else 0
    for i in range(len(labels)):
        for j in range(len(labels)):
            color = "white" if matrix[i, j] > threshold else "black"
            ax.text(j, i, str(int(matrix[i, j])), ha="center", va="center",
                    color=color)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title(title)
    _save(fig, path)


def plot_bf_matrix(models: Sequence[str], log_bf: np.ndarray, title: str, path) -> None:
    """Pairwise log10 Bayes factor heat map."""
    values = log_bf / np.log(10.0)
    limit = max(1.0, float(np.nanmax(np.abs(values))))
    fig, ax = plt.subplots(figsize=(0.8 * len(models) + 2, 0.8 * len(models) + 1.5))
    im = ax.imshow(values, cmap="PuOr", vmin=-limit, vmax=limit)
    ax.set_xticks(range(len(models)), models, rotation=45, ha="right")
    ax.set_yticks(range(len(models)), models)
    for i in range(len(models)):
        for j in range(len(models)):
            if i != j:
                ax.text(j, i, f"{values[i, j]:.2f}", ha="center", va="center",
                        fontsize=7)
    fig.colorbar(im, ax=ax, shrink=0.8, label="log10 BF(different vs common)")
    ax.set_title(title)
    _save(fig, path)
