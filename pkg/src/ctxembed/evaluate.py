"""Intrinsic benchmarks (word pairs, synonym selection, nearest neighbors)
and the averaged-embedding sentiment benchmark."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ctxembed.embeddings import EmbeddingSet

logger = logging.getLogger(__name__)


# ------------------------------------------------------------------ types

@dataclass
class WordPairDataset:
    """Word pairs annotated with a gold similarity score."""

    entries: list[tuple[str, str, float]]


@dataclass
class ToeflItem:
    target: str
    choices: tuple[str, str, str, str]
    answer: int


@dataclass
class LabeledSentenceDataset:
    """Tokenized sentences with binary labels."""

    entries: list[tuple[list[str], int]]


@dataclass
class WordPairResult:
    spearman: float
    coverage: float
    n_used: int


@dataclass
class ToeflResult:
    accuracy: float  # over covered items
    coverage: float
    accuracy_over_all: float
    n_used: int


@dataclass
class FeaturizeStats:
    sentences: int = 0
    all_oov: int = 0


# ------------------------------------------------------------------ core

def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; a zero vector against anything scores 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v / (nu * nv))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    n = len(values)
    sorted_vals = values[order]
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i: j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of average-tied rank vectors.

    Returns nan when either input is constant (the correlation is undefined
    there, and nan is distinct from a genuine 0).
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-d sequences of equal length")
    if len(x) < 2:
        raise ValueError(f"need at least 2 observations, got {len(x)}")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = np.sqrt((dx @ dx) * (dy @ dy))
    if denom == 0.0:
        return float("nan")
    return float(dx @ dy / denom)


def eval_wordpairs(e: EmbeddingSet, ds: WordPairDataset) -> WordPairResult:
    """Spearman correlation between gold scores and embedding cosines.

    Pairs with either word out of vocabulary are excluded and reported via
    the coverage fraction.
    """
    gold: list[float] = []
    ours: list[float] = []
    for w1, w2, score in ds.entries:
        if w1 in e and w2 in e:
            gold.append(score)
            ours.append(cosine(e.get(w1), e.get(w2)))
    if len(gold) < 2:
        raise ValueError(f"only {len(gold)} of {len(ds.entries)} pairs usable; need at least 2")
    return WordPairResult(
        spearman=spearman(gold, ours),
        coverage=len(gold) / len(ds.entries),
        n_used=len(gold),
    )


def eval_toefl(e: EmbeddingSet, items: Sequence[ToeflItem]) -> ToeflResult:
    """Synonym selection by maximum cosine to the target.

    Items whose target (or every choice) is out of vocabulary are skipped and
    count against coverage. Score ties go to the lowest choice index.
    Accuracy is reported both over covered items and over all items.
    """
    used = 0
    correct = 0
    for item in items:
        if item.target not in e:
            continue
        tv = e.get(item.target)
        best_idx = -1
        best_sim = -np.inf
        for idx, choice in enumerate(item.choices):
            if choice not in e:
                continue
            sim = cosine(tv, e.get(choice))
            if sim > best_sim:
                best_sim = sim
                best_idx = idx
        if best_idx < 0:
            continue
        used += 1
        if best_idx == item.answer:
            correct += 1
    n = len(items)
    return ToeflResult(
        accuracy=correct / used if used else float("nan"),
        coverage=used / n if n else 0.0,
        accuracy_over_all=correct / n if n else float("nan"),
        n_used=used,
    )


def nearest_neighbors(e: EmbeddingSet, word: str, n: int) -> list[tuple[str, float]]:
    """Top-n words by cosine to ``word``, excluding the word itself."""
    if word not in e:
        raise KeyError(word)
    qi = e.index[word]
    q = e.vectors[qi]
    qn = np.linalg.norm(q)
    norms = np.linalg.norm(e.vectors, axis=1)
    denom = norms * qn
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(denom > 0.0, e.vectors @ q / denom, 0.0)
    sims[qi] = -np.inf
    order = np.lexsort((np.arange(len(sims)), -sims))[: min(n, len(sims) - 1)]
    return [(e.words[i], float(sims[i])) for i in order]


# ------------------------------------------------------------- sentiment

def senti_featurize(e: EmbeddingSet, tokens: Sequence[str],
                    stats: FeaturizeStats | None = None) -> np.ndarray:
    """Mean of the in-vocabulary word vectors (zero vector if none)."""
    rows = [e.index[t] for t in tokens if t in e]
    if stats is not None:
        stats.sentences += 1
    if not rows:
        if stats is not None:
            stats.all_oov += 1
        return np.zeros(e.dim)
    return e.vectors[rows].mean(axis=0)


def _senti_loss_grad(X, y, w, b, l2):
    z = X @ w + b
    margins = y * z
    loss = float(np.mean(np.logaddexp(0.0, -margins)) + l2 * (w @ w))
    coef = -y * 0.5 * (1.0 - np.tanh(0.5 * margins)) / len(y)
    gw = X.T @ coef + 2.0 * l2 * w
    gb = float(coef.sum())
    return loss, gw, gb


def senti_train(
    features: np.ndarray,
    labels: Sequence[int],
    l2: float = 1e-4,
    max_iter: int = 500,
    tol: float = 1e-8,
    history: list[float] | None = None,
) -> tuple[np.ndarray, float]:
    """L2-regularized logistic regression by full-batch descent.

    Deterministic: gradient descent with Armijo backtracking from a unit
    step, stopping when the gradient norm drops below ``tol`` or after
    ``max_iter`` iterations. The bias is unregularized. Returns (weights,
    bias); pass ``history`` to record the loss after every iteration.
    """
    X = np.asarray(features, dtype=np.float64)
    if not np.isfinite(X).all():
        raise ValueError("non-finite feature values")
    labels = np.asarray(labels)
    classes = set(int(v) for v in labels)
    if classes != {0, 1}:
        raise ValueError(f"need both labels 0 and 1 in the training split, got {sorted(classes)}")
    y = 2.0 * labels - 1.0
    w = np.zeros(X.shape[1])
    b = 0.0
    loss, gw, gb = _senti_loss_grad(X, y, w, b, l2)
    if history is not None:
        history.append(loss)
    for _ in range(max_iter):
        g2 = float(gw @ gw + gb * gb)
        if np.sqrt(g2) < tol:
            break
        step = 1.0
        for _ in range(80):
            w2 = w - step * gw
            b2 = b - step * gb
            new_loss, gw2, gb2 = _senti_loss_grad(X, y, w2, b2, l2)
            if new_loss <= loss - 1e-4 * step * g2:
                break
            step *= 0.5
        else:
            break  # no acceptable step; gradient is numerically flat
        w, b, loss, gw, gb = w2, b2, new_loss, gw2, gb2
        if history is not None:
            history.append(loss)
    return w, b


def senti_eval(model: tuple[np.ndarray, float], features: np.ndarray,
               labels: Sequence[int]) -> float:
    """Fraction of sentences whose decision sign matches the label.

    A score of exactly zero predicts label 0.
    """
    w, b = model
    X = np.asarray(features, dtype=np.float64)
    preds = (X @ w + b > 0.0).astype(int)
    labels = np.asarray(labels, dtype=int)
    return float((preds == labels).mean())


# ------------------------------------------------------------------ files

def load_word_pairs(path: str | Path) -> WordPairDataset:
    """Read "word1<TAB>word2<TAB>score" rows (words lowercased)."""
    entries: list[tuple[str, str, float]] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(cols)}")
            w1, w2 = cols[0].lower(), cols[1].lower()
            score = float(cols[2])
            if not np.isfinite(score):
                raise ValueError(f"{path}:{lineno}: non-finite gold score")
            key = (min(w1, w2), max(w1, w2))
            if key in seen:
                raise ValueError(f"{path}:{lineno}: duplicate pair {w1!r}/{w2!r}")
            seen.add(key)
            entries.append((w1, w2, score))
    return WordPairDataset(entries)


def load_toefl(path: str | Path) -> list[ToeflItem]:
    """Read "target<TAB>c1<TAB>c2<TAB>c3<TAB>c4<TAB>answer_index" rows."""
    items: list[ToeflItem] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 columns, got {len(cols)}")
            target = cols[0].lower()
            choices = tuple(c.lower() for c in cols[1:5])
            answer = int(cols[5])
            if not 0 <= answer <= 3:
                raise ValueError(f"{path}:{lineno}: answer index {answer} out of range")
            if len(set(choices)) != 4:
                raise ValueError(f"{path}:{lineno}: choices must be distinct")
            items.append(ToeflItem(target, choices, answer))
    return items


def load_sentiment(path: str | Path) -> LabeledSentenceDataset:
    """Read "label<TAB>space-tokenized sentence" rows (tokens lowercased)."""
    entries: list[tuple[list[str], int]] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(cols)}")
            label = int(cols[0])
            if label not in (0, 1):
                raise ValueError(f"{path}:{lineno}: label must be 0 or 1, got {label}")
            tokens = [t.lower() for t in cols[1].split()]
            if not tokens:
                raise ValueError(f"{path}:{lineno}: empty sentence")
            entries.append((tokens, label))
    return LabeledSentenceDataset(entries)
