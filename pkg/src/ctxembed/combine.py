"""Combine two embedding sets: concatenation, SVD reduction, or linear CCA."""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ctxembed.embeddings import EmbeddingSet
from ctxembed.evaluate import WordPairDataset, eval_wordpairs

logger = logging.getLogger(__name__)

_CCA_MAGIC = b"CCAM"
_CCA_VERSION = 1


@dataclass
class CcaModel:
    """Per-view centering vectors and projections, with the canonical
    correlations achieved on the training views (sorted descending)."""

    mean_x: np.ndarray
    mean_y: np.ndarray
    Px: np.ndarray  # d_x x k
    Py: np.ndarray  # d_y x k
    correlations: np.ndarray
    rx: float
    ry: float

    @property
    def k(self) -> int:
        return self.Px.shape[1]

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as f:
            f.write(_CCA_MAGIC)
            f.write(struct.pack("<IIIIdd", _CCA_VERSION, self.Px.shape[0],
                                self.Py.shape[0], self.k, self.rx, self.ry))
            for arr in (self.mean_x, self.mean_y, self.Px, self.Py, self.correlations):
                f.write(np.ascontiguousarray(arr, dtype=np.float64).tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "CcaModel":
        with open(path, "rb") as f:
            if f.read(4) != _CCA_MAGIC:
                raise ValueError(f"{path}: not a CCA model file")
            version, dx, dy, k, rx, ry = struct.unpack("<IIIIdd", f.read(32))
            if version != _CCA_VERSION:
                raise ValueError(f"{path}: unsupported CCA model version {version}")

            def block(shape):
                n = int(np.prod(shape))
                return np.frombuffer(f.read(8 * n), dtype=np.float64).reshape(shape).copy()

            return cls(
                mean_x=block((dx,)),
                mean_y=block((dy,)),
                Px=block((dx, k)),
                Py=block((dy, k)),
                correlations=block((k,)),
                rx=rx,
                ry=ry,
            )


def shared_words(a: EmbeddingSet, b: EmbeddingSet) -> list[str]:
    """Vocabulary intersection in a's id order."""
    return [w for w in a.words if w in b]


def length_normalize(e: EmbeddingSet) -> EmbeddingSet:
    """Scale every row to unit L2 norm (zero rows stay zero)."""
    norms = np.linalg.norm(e.vectors, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return EmbeddingSet(e.words, e.vectors / norms)


def concat(a: EmbeddingSet, b: EmbeddingSet) -> EmbeddingSet:
    """Row-wise concatenation over the vocabulary intersection."""
    words = shared_words(a, b)
    if not words:
        raise ValueError("embedding vocabularies do not intersect")
    rows_a = a.vectors[[a.index[w] for w in words]]
    rows_b = b.vectors[[b.index[w] for w in words]]
    return EmbeddingSet(words, np.hstack([rows_a, rows_b]))


def svd_reduce(e: EmbeddingSet, k: int, power: float = 1.0, center: bool = True) -> EmbeddingSet:
    """Reduce to k dimensions via thin SVD; rows become U_k * S_k^power.

    Columns are mean-centered first unless ``center`` is off. Requesting k
    beyond the matrix rank pads with zero columns and logs a warning.
    """
    if not 1 <= k <= e.dim:
        raise ValueError(f"k must be in 1..{e.dim}, got {k}")
    if not 0.0 <= power <= 1.0:
        raise ValueError(f"power must lie in [0, 1], got {power}")
    X = e.vectors
    if center:
        X = X - X.mean(axis=0)
    U, S, _ = np.linalg.svd(X, full_matrices=False)
    tol = max(X.shape) * np.finfo(np.float64).eps * (S[0] if len(S) else 0.0)
    rank = int((S > tol).sum())
    if k > rank:
        logger.warning("requested k=%d exceeds matrix rank %d; trailing columns are zero", k, rank)
    S = S.copy()
    S[rank:] = 0.0
    scale = np.zeros_like(S)
    scale[:rank] = S[:rank] ** power
    return EmbeddingSet(e.words, U[:, :k] * scale[:k])


def _inv_sqrt_psd(M: np.ndarray, what: str) -> np.ndarray:
    evals, evecs = np.linalg.eigh(M)
    tol = len(M) * np.finfo(np.float64).eps * max(float(evals[-1]), 0.0)
    if evals[0] <= tol:
        raise np.linalg.LinAlgError(
            f"{what} is singular or indefinite; increase its regularizer"
        )
    return (evecs * evals ** -0.5) @ evecs.T


def cca_fit(a: EmbeddingSet, b: EmbeddingSet, k: int, rx: float = 0.0, ry: float = 0.0) -> CcaModel:
    """Fit linear CCA over the two views' shared vocabulary.

    Views are centered; covariances are X'X/n plus a ridge term on the
    diagonal. The projections whiten each view and rotate onto the singular
    directions of the cross-covariance, so projected training views have
    correlation diag(correlations).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > min(a.dim, b.dim):
        raise ValueError(f"k={k} exceeds min view dimensionality {min(a.dim, b.dim)}")
    words = shared_words(a, b)
    n = len(words)
    if n <= k:
        raise ValueError(f"need more shared words ({n}) than projection dimensions ({k})")
    X = a.vectors[[a.index[w] for w in words]]
    Y = b.vectors[[b.index[w] for w in words]]
    mean_x = X.mean(axis=0)
    mean_y = Y.mean(axis=0)
    Xc = X - mean_x
    Yc = Y - mean_y
    Sxx = Xc.T @ Xc / n + rx * np.eye(a.dim)
    Syy = Yc.T @ Yc / n + ry * np.eye(b.dim)
    Sxy = Xc.T @ Yc / n
    isx = _inv_sqrt_psd(Sxx, "view-x covariance")
    isy = _inv_sqrt_psd(Syy, "view-y covariance")
    U, S, Vt = np.linalg.svd(isx @ Sxy @ isy)
    return CcaModel(
        mean_x=mean_x,
        mean_y=mean_y,
        Px=isx @ U[:, :k],
        Py=isy @ Vt.T[:, :k],
        correlations=np.maximum(S[:k], 0.0),
        rx=rx,
        ry=ry,
    )


def cca_apply(model: CcaModel, e: EmbeddingSet, view: str = "x") -> EmbeddingSet:
    """Project an embedding set through one view of a fitted CCA model."""
    if view == "x":
        mean, P = model.mean_x, model.Px
    elif view == "y":
        mean, P = model.mean_y, model.Py
    else:
        raise ValueError(f"view must be 'x' or 'y', got {view!r}")
    if e.dim != len(mean):
        raise ValueError(f"embedding dim {e.dim} does not match view {view} dim {len(mean)}")
    return EmbeddingSet(e.words, (e.vectors - mean) @ P)


def tune_cca(
    a: EmbeddingSet,
    b: EmbeddingSet,
    benchmark: WordPairDataset,
    k_grid: Sequence[int],
    r_grid: Sequence[float],
) -> tuple[CcaModel, list[tuple[int, float, float]]]:
    """Exhaustive grid search over (k, regularizer) scored by view-x Spearman.

    Returns the best model and the full (k, r, spearman) score table; ties
    go to the earliest grid cell.
    """
    if not k_grid or not r_grid:
        raise ValueError("empty hyperparameter grid")
    report: list[tuple[int, float, float]] = []
    best: tuple[float, CcaModel] | None = None
    for k in k_grid:
        for r in r_grid:
            model = cca_fit(a, b, k, rx=r, ry=r)
            projected = cca_apply(model, a, view="x")
            score = eval_wordpairs(projected, benchmark).spearman
            report.append((k, r, score))
            if best is None or score > best[0]:
                best = (score, model)
    assert best is not None
    return best[1], report


def write_tuning_report(path: str | Path, report: Sequence[tuple[int, float, float]]) -> None:
    """TSV rows "k<TAB>r<TAB>spearman"."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("k\tr\tspearman\n")
        for k, r, score in report:
            f.write(f"{k}\t{r!r}\t{score!r}\n")
