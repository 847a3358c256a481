"""Interpolated Kneser-Ney n-gram model and top-k substitute vectors.

Counting conventions
--------------------
Sentences are padded per level: a level-k count table is built over
``[<s>]*(k-1) + tokens + [</s>]``. The top level uses raw counts; every
lower level uses continuation counts (the number of distinct left
extensions among the raw types one level up). Each level k estimate is

    P_k(w | h) = max(c_k(h w) - D_k, 0) / c_k(h)  +  gamma_k(h) * P_{k-1}(w | h[1:])
    gamma_k(h) = D_k * |{w : c_k(h w) > 0}| / c_k(h)

with ``c_k(h) = sum_w c_k(h w)``. An unseen history passes straight through
to the next level. The unigram level interpolates with the uniform
distribution over the predictable symbols (vocabulary words, the end
marker, and the unknown symbol; the begin marker is never predicted), so
every query has positive probability and the distribution sums to one for
any history.

Discounts must lie in (0, 1]; since all counts are integers >= 1, the
discounted mass then exactly matches what the backoff weights redistribute.
"""

from __future__ import annotations

import logging
import math
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ctxembed.corpus import Vocabulary

logger = logging.getLogger(__name__)

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

_BOS_ID = 0
_EOS_ID = 1
_UNK_ID = 2
_N_RESERVED = 3

_MAGIC = b"KNLM"
_VERSION = 1

_DEFAULT_DISCOUNT = 0.75
_CACHE_LIMIT = 4_000_000


@dataclass
class SubstituteVector:
    """Top-k substitutes for one token occurrence.

    ``entries`` holds (vocabulary word id, probability) sorted by descending
    probability (score ties broken by ascending id); the probabilities sum
    to 1. ``target`` is the vocabulary id of the observed token, or None if
    it was out of vocabulary.
    """

    sent_idx: int
    pos: int
    target: int | None
    entries: list[tuple[int, float]]


class KneserNeyModel:
    """A trained interpolated Kneser-Ney model; immutable after training.

    Internally words are mapped to dense ids with three reserved symbols
    (begin, end, unknown) ahead of the vocabulary, so external vocabulary id
    ``i`` is internal id ``i + 3``.
    """

    def __init__(
        self,
        order: int,
        words: list[str],
        discounts: list[float],
        uni_imm: dict[int, float],
        uni_gamma: float,
        tables: list[dict[tuple[int, ...], tuple[float, dict[int, float]]]],
    ):
        self.order = order
        self.words = words
        self.discounts = discounts
        self._uni_imm = uni_imm
        self._uni_gamma = uni_gamma
        # tables[k] holds level k+2 ... kept as list indexed by level for clarity
        self._tables = tables
        self._index = {w: i for i, w in enumerate(words)}
        self._n_ids = _N_RESERVED + len(words)
        # predictable symbols: everything except the begin marker
        self._uniform = 1.0 / (self._n_ids - 1)
        self._cache: dict[tuple[int, tuple[int, ...]], float] = {}

    # ------------------------------------------------------------------ ids

    def intern(self, token: str) -> int:
        if token == BOS:
            return _BOS_ID
        if token == EOS:
            return _EOS_ID
        if token == UNK:
            return _UNK_ID
        i = self._index.get(token)
        return _UNK_ID if i is None else i + _N_RESERVED

    @property
    def vocab_size(self) -> int:
        return len(self.words)

    # ------------------------------------------------------- probabilities

    def _prob(self, w: int, hist: tuple[int, ...]) -> float:
        """Backoff recursion over internal ids; memoized per model."""
        key = (w, hist)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if not hist:
            p = self._uni_imm.get(w, 0.0)
            if w != _BOS_ID:
                p += self._uni_gamma * self._uniform
        else:
            entry = self._tables[len(hist) + 1].get(hist)
            if entry is None:
                p = self._prob(w, hist[1:])
            else:
                gamma, cont = entry
                p = cont.get(w, 0.0) + gamma * self._prob(w, hist[1:])
        if len(self._cache) >= _CACHE_LIMIT:
            self._cache.clear()
        self._cache[key] = p
        return p

    def prob(self, word: str, history: Sequence[str] = ()) -> float:
        """Probability of ``word`` after ``history`` (both as strings).

        Out-of-vocabulary words score as the unknown symbol; histories longer
        than order-1 are truncated to their tail.
        """
        hist = tuple(self.intern(t) for t in history)
        if len(hist) > self.order - 1:
            hist = hist[len(hist) - (self.order - 1):]
        return self._prob(self.intern(word), hist)

    def logprob(self, word: str, history: Sequence[str] = ()) -> float:
        p = self.prob(word, history)
        return math.log(p) if p > 0.0 else float("-inf")

    def score_slot(self, sentence: Sequence[str], pos: int, candidate: str) -> float:
        """Log score of ``candidate`` filling ``sentence[pos]``.

        Sums the log probabilities of exactly the token-predicting n-gram
        windows that overlap the slot: predicted positions ``pos`` through
        ``min(pos + order - 1, len(sentence) - 1)``, with begin markers
        padding histories on the left. The end-marker window is not scored.
        """
        n = len(sentence)
        if not 0 <= pos < n:
            raise IndexError(f"pos {pos} out of range for sentence of length {n}")
        ids = [self.intern(t) for t in sentence]
        ids[pos] = self.intern(candidate)
        return self._score_slot_ids(ids, pos)

    def _score_slot_ids(self, ids: list[int], pos: int) -> float:
        order = self.order
        padded = [_BOS_ID] * (order - 1) + ids
        total = 0.0
        for i in range(pos, min(pos + order, len(ids))):
            j = i + order - 1
            p = self._prob(padded[j], tuple(padded[j - order + 1: j]))
            total += math.log(p) if p > 0.0 else float("-inf")
        return total

    def substitutes(self, sentence: Sequence[str], pos: int, k: int = 10,
                    sent_idx: int = 0) -> SubstituteVector:
        """Top-k vocabulary words by slot score, with softmax probabilities.

        Every vocabulary word is scored (reserved symbols are never
        proposed); ties are broken by ascending word id. Probabilities are
        normalized over the k winners only.
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        n = len(sentence)
        if not 0 <= pos < n:
            raise IndexError(f"pos {pos} out of range for sentence of length {n}")
        ids = [self.intern(t) for t in sentence]
        observed = ids[pos]
        scores = np.empty(self.vocab_size)
        for c in range(self.vocab_size):
            ids[pos] = c + _N_RESERVED
            scores[c] = self._score_slot_ids(ids, pos)
        k = min(k, self.vocab_size)
        top = np.lexsort((np.arange(self.vocab_size), -scores))[:k]
        top_scores = scores[top]
        shifted = np.exp(top_scores - top_scores[0])
        probs = shifted / shifted.sum()
        target = observed - _N_RESERVED if observed >= _N_RESERVED else None
        return SubstituteVector(
            sent_idx=sent_idx,
            pos=pos,
            target=target,
            entries=[(int(w), float(p)) for w, p in zip(top, probs)],
        )

    # -------------------------------------------------------- persistence

    def save(self, path: str | Path) -> None:
        """Serialize to a sorted-trie binary layout with a version header.

        Histories are stored sorted by id tuple and continuations sorted by
        id, so the file is a depth-first walk of the context trie per level.
        """
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(struct.pack("<IIQ", _VERSION, self.order, len(self.words)))
            for d in self.discounts:
                f.write(struct.pack("<d", d))
            for w in self.words:
                raw = w.encode("utf-8")
                f.write(struct.pack("<I", len(raw)))
                f.write(raw)
            f.write(struct.pack("<d", self._uni_gamma))
            f.write(struct.pack("<Q", len(self._uni_imm)))
            for wid in sorted(self._uni_imm):
                f.write(struct.pack("<Id", wid, self._uni_imm[wid]))
            for level in range(2, self.order + 1):
                table = self._tables[level]
                f.write(struct.pack("<Q", len(table)))
                for hist in sorted(table):
                    gamma, cont = table[hist]
                    f.write(struct.pack(f"<{level - 1}I", *hist))
                    f.write(struct.pack("<dI", gamma, len(cont)))
                    for wid in sorted(cont):
                        f.write(struct.pack("<Id", wid, cont[wid]))

    @classmethod
    def load(cls, path: str | Path) -> "KneserNeyModel":
        with open(path, "rb") as f:
            magic = f.read(4)
            if magic != _MAGIC:
                raise ValueError(f"{path}: not a model file (bad magic {magic!r})")
            version, order, n_words = struct.unpack("<IIQ", f.read(16))
            if version != _VERSION:
                raise ValueError(f"{path}: unsupported model version {version}")
            discounts = [struct.unpack("<d", f.read(8))[0] for _ in range(order)]
            words = []
            for _ in range(n_words):
                (wlen,) = struct.unpack("<I", f.read(4))
                words.append(f.read(wlen).decode("utf-8"))
            (uni_gamma,) = struct.unpack("<d", f.read(8))
            (n_uni,) = struct.unpack("<Q", f.read(8))
            uni_imm: dict[int, float] = {}
            for _ in range(n_uni):
                wid, p = struct.unpack("<Id", f.read(12))
                uni_imm[wid] = p
            tables: list[dict] = [dict() for _ in range(order + 1)]
            for level in range(2, order + 1):
                (n_hist,) = struct.unpack("<Q", f.read(8))
                table: dict[tuple[int, ...], tuple[float, dict[int, float]]] = {}
                for _ in range(n_hist):
                    hist = struct.unpack(f"<{level - 1}I", f.read(4 * (level - 1)))
                    gamma, n_cont = struct.unpack("<dI", f.read(12))
                    cont: dict[int, float] = {}
                    for _ in range(n_cont):
                        wid, p = struct.unpack("<Id", f.read(12))
                        cont[wid] = p
                    table[hist] = (gamma, cont)
                tables[level] = table
        return cls(order, words, discounts, uni_imm, uni_gamma, tables)


def _resolve_discounts(
    discount: float | Sequence[float] | str,
    order: int,
    level_counts: list[Counter],
) -> list[float]:
    if isinstance(discount, str):
        if discount != "estimated":
            raise ValueError(f"discount must be a number, a sequence, or 'estimated', got {discount!r}")
        out = []
        for level in range(1, order + 1):
            counts = level_counts[level]
            n1 = sum(1 for c in counts.values() if c == 1)
            n2 = sum(1 for c in counts.values() if c == 2)
            if n1 == 0 or n1 + 2 * n2 == 0:
                logger.warning("level %d: degenerate count-of-counts, falling back to D=%.2f",
                               level, _DEFAULT_DISCOUNT)
                out.append(_DEFAULT_DISCOUNT)
            else:
                out.append(n1 / (n1 + 2.0 * n2))
        return out
    if isinstance(discount, (int, float)):
        discounts = [float(discount)] * order
    else:
        discounts = [float(d) for d in discount]
        if len(discounts) != order:
            raise ValueError(f"need {order} per-level discounts, got {len(discounts)}")
    for d in discounts:
        if not 0.0 < d <= 1.0:
            raise ValueError(f"discounts must lie in (0, 1], got {d}")
    return discounts


def _group_by_history(counts: Counter) -> dict[tuple[int, ...], dict[int, int]]:
    grouped: dict[tuple[int, ...], dict[int, int]] = {}
    for gram, c in counts.items():
        grouped.setdefault(gram[:-1], {})[gram[-1]] = c
    return grouped


def train_kn(
    corpus: Iterable[Sequence[str]],
    vocab: Vocabulary,
    order: int = 4,
    discount: float | Sequence[float] | str = _DEFAULT_DISCOUNT,
) -> KneserNeyModel:
    """Train an interpolated Kneser-Ney model of the given order.

    The vocabulary is fixed beforehand; corpus tokens outside it count as
    the unknown symbol. ``discount`` is a single value shared by all
    levels, one value per level, or "estimated" for the count-of-counts
    rule n1/(n1 + 2*n2) per level.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    index = {w: i + _N_RESERVED for i, w in enumerate(vocab.words)}

    raw: list[Counter] = [Counter() for _ in range(order + 1)]
    for sentence in corpus:
        ids = [index.get(t, _UNK_ID) for t in sentence]
        if not ids:
            continue
        for k in range(1, order + 1):
            seq = [_BOS_ID] * (k - 1) + ids + [_EOS_ID]
            counts = raw[k]
            for i in range(len(seq) - k + 1):
                counts[tuple(seq[i: i + k])] += 1
    if not raw[order]:
        raise ValueError(f"corpus has no full {order}-gram")

    # level counts actually estimated from: raw at the top, continuation below
    level_counts: list[Counter] = [Counter() for _ in range(order + 1)]
    level_counts[order] = raw[order]
    for k in range(order - 1, 0, -1):
        cont: Counter = Counter()
        for gram in raw[k + 1]:
            cont[gram[1:]] += 1
        level_counts[k] = cont

    discounts = _resolve_discounts(discount, order, level_counts)

    tables: list[dict] = [dict() for _ in range(order + 1)]
    for level in range(2, order + 1):
        d = discounts[level - 1]
        table: dict[tuple[int, ...], tuple[float, dict[int, float]]] = {}
        for hist, conts in _group_by_history(level_counts[level]).items():
            denom = float(sum(conts.values()))
            gamma = d * len(conts) / denom
            table[hist] = (gamma, {w: (c - d) / denom for w, c in conts.items()})
        tables[level] = table

    d1 = discounts[0]
    uni = level_counts[1]
    total = float(sum(uni.values()))
    uni_gamma = d1 * len(uni) / total
    uni_imm = {gram[0]: (c - d1) / total for gram, c in uni.items()}

    return KneserNeyModel(
        order=order,
        words=list(vocab.words),
        discounts=discounts,
        uni_imm=uni_imm,
        uni_gamma=uni_gamma,
        tables=tables,
    )


# ------------------------------------------------------------------ file io

def write_substitutes(path: str | Path, vectors: Iterable[SubstituteVector],
                      words: Sequence[str]) -> int:
    """Write one "sent_idx<TAB>pos<TAB>s1 p1<TAB>s2 p2..." line per occurrence."""
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for vec in vectors:
            cols = [str(vec.sent_idx), str(vec.pos)]
            cols.extend(f"{words[w]} {p!r}" for w, p in vec.entries)
            f.write("\t".join(cols) + "\n")
            n += 1
    return n


def read_substitutes(path: str | Path, vocab: Vocabulary) -> Iterator[SubstituteVector]:
    """Stream substitute vectors back from a file written by
    :func:`write_substitutes`. Targets are not stored in the file; use
    :func:`attach_targets` to recover them from the corpus."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) < 3:
                raise ValueError(f"{path}:{lineno}: expected at least 3 columns")
            entries: list[tuple[int, float]] = []
            for cell in cols[2:]:
                word, prob = cell.rsplit(" ", 1)
                wid = vocab.id(word)
                if wid is None:
                    raise ValueError(f"{path}:{lineno}: substitute {word!r} not in vocabulary")
                entries.append((wid, float(prob)))
            yield SubstituteVector(int(cols[0]), int(cols[1]), None, entries)


def attach_targets(
    vectors: Iterable[SubstituteVector],
    corpus: Iterable[Sequence[str]],
    vocab: Vocabulary,
) -> Iterator[SubstituteVector]:
    """Fill in targets by joining vectors (sorted by sent_idx) with the corpus."""
    sent_iter = enumerate(corpus)
    cur_idx = -1
    cur_sent: Sequence[str] = ()
    for vec in vectors:
        if vec.sent_idx < cur_idx:
            raise ValueError("substitute vectors must be sorted by sentence index")
        while cur_idx < vec.sent_idx:
            try:
                cur_idx, cur_sent = next(sent_iter)
            except StopIteration:
                raise ValueError(
                    f"substitute vector references sentence {vec.sent_idx} "
                    "beyond the end of the corpus"
                ) from None
        if not 0 <= vec.pos < len(cur_sent):
            raise ValueError(
                f"substitute vector references position {vec.pos} in "
                f"{len(cur_sent)}-token sentence {vec.sent_idx}"
            )
        vec.target = vocab.id(cur_sent[vec.pos])
        yield vec
