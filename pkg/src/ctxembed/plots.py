"""Figure rendering for evaluation reports.

Figures are written next to the delimited report files. The Agg backend is
forced so rendering works headless, and PNG metadata is stripped so repeated
runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_SAVE_KWARGS = {"dpi": 150, "metadata": {"Software": None}}


def score_bars(path: str | Path, labels: Sequence[str], values: Sequence[float],
               title: str, ylabel: str) -> None:
    """Vertical bar chart of one score per label."""
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(labels)), 3.2))
    xs = range(len(labels))
    ax.bar(xs, values, color="#4878d0")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def neighbor_bars(path: str | Path, groups: Sequence[tuple[str, Sequence[tuple[str, float]]]]) -> None:
    """Horizontal bars of neighbor cosines, one panel per query word."""
    n = len(groups)
    fig, axes = plt.subplots(n, 1, figsize=(5.0, 0.45 * sum(len(g[1]) for g in groups) + n),
                             squeeze=False)
    for ax, (query, neighbors) in zip(axes[:, 0], groups):
        words = [w for w, _ in neighbors]
        sims = [s for _, s in neighbors]
        ys = range(len(words))
        ax.barh(list(ys), sims, color="#6acc64")
        ax.set_yticks(list(ys))
        ax.set_yticklabels(words)
        ax.invert_yaxis()
        ax.set_xlabel("cosine")
        ax.set_title(f"nearest neighbors of {query!r}")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def grid_heatmap(path: str | Path, ks: Sequence[int], rs: Sequence[float],
                 scores: Sequence[Sequence[float]], title: str) -> None:
    """Heatmap of tuning scores over a (k, regularizer) grid."""
    fig, ax = plt.subplots(figsize=(1.0 + 0.8 * len(rs), 1.0 + 0.6 * len(ks)))
    im = ax.imshow(scores, aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(rs)))
    ax.set_xticklabels([f"{r:g}" for r in rs], rotation=30, ha="right")
    ax.set_yticks(range(len(ks)))
    ax.set_yticklabels([str(k) for k in ks])
    ax.set_xlabel("regularizer")
    ax.set_ylabel("k")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="spearman")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
