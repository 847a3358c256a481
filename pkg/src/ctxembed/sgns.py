"""Skip-gram training with negative sampling over weighted pair streams.

Each (target, context, weight) pair contributes one gradient ascent step on

    weight * [ log sigma(C[c] . W[t]) + sum_neg log sigma(-C[neg] . W[t]) ]

with the step size decaying linearly over all processed pairs. The weight
scales the step, so weighted pairs need no frequency duplication. The hot
loop is a numba kernel fed with pre-drawn negatives; a pure-numpy engine
with identical semantics backs the oracle tests and machines without a
working JIT. Single-worker runs are bit-reproducible for a fixed seed;
multi-worker runs update shared matrices without locks and are not.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from ctxembed.corpus import Vocabulary
from ctxembed.embeddings import EmbeddingSet

logger = logging.getLogger(__name__)

LR_FLOOR_RATIO = 1e-4
_CHUNK = 1 << 18

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        return deco


@dataclass
class TrainConfig:
    dim: int = 100
    negatives: int = 5
    epochs: int = 3
    initial_lr: float = 0.025
    table_exponent: float = 0.75
    seed: int = 1
    workers: int = 1
    engine: str = "numba"

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.negatives < 0:
            raise ValueError(f"negatives must be >= 0, got {self.negatives}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.initial_lr <= 0:
            raise ValueError(f"initial_lr must be > 0, got {self.initial_lr}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.engine not in ("numba", "python"):
            raise ValueError(f"engine must be 'numba' or 'python', got {self.engine!r}")


@dataclass
class TrainState:
    W: np.ndarray  # target vectors, |word vocab| x dim
    C: np.ndarray  # context vectors, |context vocab| x dim
    pairs_seen: int = 0
    lr: float = 0.025


class NegativeSampler:
    """Draws context ids with probability proportional to count^exponent."""

    def __init__(self, counts: Sequence[int] | np.ndarray, exponent: float = 0.75):
        weights = np.asarray(counts, dtype=np.float64) ** exponent
        if weights.size == 0:
            raise ValueError("empty context vocabulary")
        self.cumulative = np.cumsum(weights)
        self.total = float(self.cumulative[-1])
        if self.total <= 0.0:
            raise ValueError("all sampling weights are zero")

    def sample(self, rng: np.random.Generator, positive: int) -> int:
        """One draw, redrawn while it equals ``positive`` (at most 100 tries)."""
        draw = positive
        for _ in range(100):
            draw = int(np.searchsorted(self.cumulative, rng.random() * self.total, side="right"))
            if draw != positive:
                break
        return draw

    def sample_batch(self, rng: np.random.Generator, positives: np.ndarray, n: int) -> np.ndarray:
        """Draw an (m, n) block of negatives with the same per-draw retry rule."""
        m = len(positives)
        negs = np.searchsorted(
            self.cumulative, rng.random((m, n)) * self.total, side="right"
        ).astype(np.int32)
        if n == 0:
            return negs
        clash = negs == positives[:, None]
        attempts = 1
        while clash.any() and attempts < 100:
            redraw = np.searchsorted(
                self.cumulative, rng.random(int(clash.sum())) * self.total, side="right"
            ).astype(np.int32)
            negs[clash] = redraw
            clash = negs == positives[:, None]
            attempts += 1
        return negs


def _sigmoid(x: float) -> float:
    # tanh form stays finite for any argument
    return 0.5 * (1.0 + math.tanh(0.5 * x))


def _log_sigmoid(x: float) -> float:
    return -np.logaddexp(0.0, -x)


def init(word_vocab: Vocabulary, ctx_vocab: Vocabulary, config: TrainConfig) -> TrainState:
    """Fresh training state: targets uniform in [-0.5/dim, 0.5/dim], contexts zero."""
    if len(word_vocab) == 0 or len(ctx_vocab) == 0:
        raise ValueError("vocabularies must be non-empty")
    rng = np.random.default_rng(config.seed)
    W = (rng.random((len(word_vocab), config.dim)) - 0.5) / config.dim
    C = np.zeros((len(ctx_vocab), config.dim))
    return TrainState(W=W, C=C, pairs_seen=0, lr=config.initial_lr)


def pair_loss(state: TrainState, t: int, c: int, negs: Sequence[int]) -> float:
    """log sigma(C[c].W[t]) + sum over negs of log sigma(-C[neg].W[t])."""
    vt = state.W[t]
    total = float(_log_sigmoid(float(state.C[c] @ vt)))
    for n in negs:
        total += float(_log_sigmoid(-float(state.C[n] @ vt)))
    return total


def pair_update(
    state: TrainState,
    t: int,
    c: int,
    weight: float,
    negs: Sequence[int],
    lr: float | None = None,
) -> TrainState:
    """One gradient ascent step on ``weight`` times the pair objective.

    All dot products use the pre-update vectors; the target row is written
    last, so the context-side updates see the original target vector.
    """
    if weight <= 0:
        raise ValueError(f"pair weight must be > 0, got {weight}")
    step = (state.lr if lr is None else lr) * weight
    W, C = state.W, state.C
    vt = W[t]
    gc = step * (1.0 - _sigmoid(float(C[c] @ vt)))
    gns = [-step * _sigmoid(float(C[n] @ vt)) for n in negs]
    work = gc * C[c]
    for n, gn in zip(negs, gns):
        work += gn * C[n]
    C[c] += gc * vt
    for n, gn in zip(negs, gns):
        C[n] += gn * vt
    W[t] += work
    return state


@njit(cache=True, nogil=True)
def _train_kernel(W, C, targets, contexts, weights, negs, lr0, floor, total, start):  # pragma: no cover - compiled
    dim = W.shape[1]
    n_negs = negs.shape[1]
    work = np.empty(dim)
    gns = np.empty(n_negs)
    for i in range(targets.shape[0]):
        lr = lr0 * (1.0 - (start + i) / total)
        if lr < floor:
            lr = floor
        step = lr * weights[i]
        t = targets[i]
        c = contexts[i]
        dot = 0.0
        for d in range(dim):
            dot += W[t, d] * C[c, d]
        gc = step * (1.0 - 0.5 * (1.0 + math.tanh(0.5 * dot)))
        for k in range(n_negs):
            nn = negs[i, k]
            dn = 0.0
            for d in range(dim):
                dn += W[t, d] * C[nn, d]
            gns[k] = -step * 0.5 * (1.0 + math.tanh(0.5 * dn))
        for d in range(dim):
            work[d] = gc * C[c, d]
        for k in range(n_negs):
            nn = negs[i, k]
            gn = gns[k]
            for d in range(dim):
                work[d] += gn * C[nn, d]
        for d in range(dim):
            C[c, d] += gc * W[t, d]
        for k in range(n_negs):
            nn = negs[i, k]
            gn = gns[k]
            for d in range(dim):
                C[nn, d] += gn * W[t, d]
        for d in range(dim):
            W[t, d] += work[d]


def _train_chunk_python(state, targets, contexts, weights, negs, lr0, floor, total, start):
    for i in range(len(targets)):
        lr = lr0 * (1.0 - (start + i) / total)
        if lr < floor:
            lr = floor
        pair_update(state, int(targets[i]), int(contexts[i]), float(weights[i]),
                    [int(x) for x in negs[i]], lr=lr)


def _materialize(pairs: Iterable) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ts: list[int] = []
    cs: list[int] = []
    ws: list[float] = []
    for p in pairs:
        if hasattr(p, "target"):
            ts.append(p.target)
            cs.append(p.context)
            ws.append(p.weight)
        elif len(p) == 3:
            ts.append(p[0])
            cs.append(p[1])
            ws.append(p[2])
        else:
            ts.append(p[0])
            cs.append(p[1])
            ws.append(1.0)
    return (
        np.asarray(ts, dtype=np.int32),
        np.asarray(cs, dtype=np.int32),
        np.asarray(ws, dtype=np.float64),
    )


def train(
    pairs: Iterable,
    word_vocab: Vocabulary,
    ctx_vocab: Vocabulary,
    config: TrainConfig,
    on_epoch_end: Callable[[int, TrainState], None] | None = None,
) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Train target and context embeddings over a weighted pair stream.

    Pairs may be WeightedPair records, (t, c, weight) triples, or bare
    (t, c) tuples (weight 1). The learning rate decays linearly from
    ``initial_lr`` to ``initial_lr * 1e-4`` across epochs * len(pairs)
    processed pairs. Negatives are drawn per pair proportional to context
    count^table_exponent, redrawing any draw equal to the positive.

    Returns (target embeddings, context embeddings); the target set is the
    usual deliverable.
    """
    targets, contexts, weights = _materialize(pairs)
    n = len(targets)
    if n == 0:
        raise ValueError("empty pair stream")
    if targets.max() >= len(word_vocab) or targets.min() < 0:
        raise ValueError("pair target id outside the word vocabulary")
    if contexts.max() >= len(ctx_vocab) or contexts.min() < 0:
        raise ValueError("pair context id outside the context vocabulary")
    if (weights <= 0).any():
        raise ValueError("pair weights must be > 0")

    engine = config.engine
    if engine == "numba" and not _HAVE_NUMBA:
        logger.warning("numba unavailable, training with the python engine")
        engine = "python"

    state = init(word_vocab, ctx_vocab, config)
    sampler = NegativeSampler(ctx_vocab.counts, config.table_exponent)
    rng = np.random.default_rng([config.seed, 1])
    total = float(n) * config.epochs
    floor = config.initial_lr * LR_FLOOR_RATIO
    processed = 0
    for epoch in range(config.epochs):
        for lo in range(0, n, _CHUNK):
            hi = min(lo + _CHUNK, n)
            negs = sampler.sample_batch(rng, contexts[lo:hi], config.negatives)
            args = (targets[lo:hi], contexts[lo:hi], weights[lo:hi], negs,
                    config.initial_lr, floor, total)
            if engine == "python":
                _train_chunk_python(state, *args, processed)
            elif config.workers == 1:
                _train_kernel(state.W, state.C, *args, processed)
            else:
                _run_sharded(state, args, processed, config.workers)
            processed += hi - lo
        state.pairs_seen = processed
        state.lr = max(config.initial_lr * (1.0 - processed / total), floor)
        if not (np.isfinite(state.W).all() and np.isfinite(state.C).all()):
            raise FloatingPointError(f"non-finite parameters after epoch {epoch}")
        if on_epoch_end is not None:
            on_epoch_end(epoch, state)
    return (
        EmbeddingSet(word_vocab.words, state.W),
        EmbeddingSet(ctx_vocab.words, state.C),
    )


def _run_sharded(state: TrainState, args: tuple, processed: int, workers: int) -> None:
    """Lock-free parallel update over contiguous shards of one chunk."""
    targets, contexts, weights, negs, lr0, floor, total = args
    m = len(targets)
    bounds = np.linspace(0, m, workers + 1).astype(int)
    threads = []
    for w in range(workers):
        lo, hi = bounds[w], bounds[w + 1]
        if lo == hi:
            continue
        threads.append(
            threading.Thread(
                target=_train_kernel,
                args=(state.W, state.C, targets[lo:hi], contexts[lo:hi], weights[lo:hi],
                      negs[lo:hi], lr0, floor, total, processed + lo),
            )
        )
    for th in threads:
        th.start()
    for th in threads:
        th.join()
