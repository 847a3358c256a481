"""Extract weighted target-context pairs for the three context types.

Window and dependency extractors emit weight 1; the substitute extractor
emits one pair per substitute with the substitute's probability as weight.
All extractors are pure per-sentence functions; only the per-type cap in
:func:`sub_pairs` carries state across sentences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ctxembed.corpus import ParsedSentence, Token, Vocabulary
from ctxembed.lm import SubstituteVector

logger = logging.getLogger(__name__)

# Suffix marking the head-side view of a dependency edge ("barks/nsubj⁻¹").
INVERSE_SUFFIX = "⁻¹"

WEIGHT_SUM_TOL = 1e-6


@dataclass(frozen=True)
class WeightedPair:
    """A (target id, context id, weight) record, the currency between
    extractors and the trainer."""

    target: int
    context: int
    weight: float = 1.0


@dataclass
class PairStats:
    """Counters for pairs dropped during extraction."""

    oov_skipped: int = 0
    emitted: int = 0


class ContextVocabBuilder:
    """Interns context strings and counts their occurrences.

    Ids are assigned in first-seen order so pairs emitted while the builder
    grows stay resolvable in the final vocabulary.
    """

    def __init__(self) -> None:
        self._index: dict[str, int] = {}
        self._words: list[str] = []
        self._counts: list[int] = []

    def id(self, context: str) -> int:
        cid = self._index.get(context)
        if cid is None:
            cid = len(self._words)
            self._index[context] = cid
            self._words.append(context)
            self._counts.append(0)
        self._counts[cid] += 1
        return cid

    def __len__(self) -> int:
        return len(self._words)

    def vocabulary(self) -> Vocabulary:
        """Freeze into a Vocabulary keeping the interned id order."""
        return Vocabulary(
            list(self._words),
            list(self._counts),
            total_tokens=sum(self._counts),
            min_count=1,
        )


def window_pairs(
    ids: Sequence[int],
    window: int,
    dynamic: bool = True,
    rng: np.random.Generator | None = None,
) -> Iterator[WeightedPair]:
    """Emit (target, neighbor, 1) pairs within ``window`` positions.

    ``ids`` must already be mapped to vocabulary ids with out-of-vocabulary
    tokens removed, so the window spans over dropped words. With ``dynamic``
    on, the effective width is drawn uniformly from 1..window once per
    position (one draw per position, in order, so runs replay exactly).
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if dynamic and rng is None:
        raise ValueError("dynamic windows need an rng")
    n = len(ids)
    for i in range(n):
        b = int(rng.integers(1, window + 1)) if dynamic else window
        for j in range(max(0, i - b), min(n, i + b + 1)):
            if j != i:
                yield WeightedPair(ids[i], ids[j], 1.0)


def _children(sentence: ParsedSentence) -> dict[int, list[int]]:
    """Map 1-based head index -> list of 1-based child indices."""
    out: dict[int, list[int]] = {}
    for i, tok in enumerate(sentence, start=1):
        if tok.head > 0:
            out.setdefault(tok.head, []).append(i)
    return out


def collapse_prepositions(sentence: ParsedSentence) -> ParsedSentence:
    """Attach prepositional objects directly to the governor.

    Handles both labeling conventions:

    - Stanford style: for h -prep-> p -pobj-> n, n is re-attached to h with
      relation "prep_<p form>".
    - UD style: a noun n under h via nmod/obl with a case child p keeps its
      head but its relation becomes "prep_<p form>" (rightmost case child
      names the label when there are several).

    Collapsed preposition tokens are detached (head set to 0) so they emit
    no pairs of their own. Prepositions without a nominal complement are
    left untouched. All rewrites are computed from the original structure
    and applied at once.
    """
    toks = list(sentence.tokens)
    kids = _children(sentence)
    new_head = [t.head for t in toks]
    new_rel = [t.deprel for t in toks]
    detach: set[int] = set()

    for p in range(1, len(toks) + 1):
        tok = toks[p - 1]
        if tok.deprel != "prep" or tok.head == 0:
            continue
        pobjs = [c for c in kids.get(p, ()) if toks[c - 1].deprel == "pobj"]
        if not pobjs:
            continue
        for n in pobjs:
            new_head[n - 1] = tok.head
            new_rel[n - 1] = f"prep_{tok.form}"
        detach.add(p)

    for n in range(1, len(toks) + 1):
        if toks[n - 1].deprel not in ("nmod", "obl"):
            continue
        cases = [c for c in kids.get(n, ()) if toks[c - 1].deprel == "case"]
        if not cases:
            continue
        new_rel[n - 1] = f"prep_{toks[max(cases) - 1].form}"
        detach.update(cases)

    for p in detach:
        new_head[p - 1] = 0

    return ParsedSentence(
        tuple(
            Token(t.form, h, r)
            for t, h, r in zip(toks, new_head, new_rel)
        )
    )


def dep_context_items(sentence: ParsedSentence) -> Iterator[tuple[str, str, str]]:
    """Yield (target form, other-endpoint form, context string) per edge side.

    Every edge h -r-> m contributes the modifier-side context (h, "m/r") and
    the head-side context (m, "h/r⁻¹"). Root and detached tokens (head 0)
    contribute no edge.
    """
    toks = sentence.tokens
    for m_idx, tok in enumerate(toks, start=1):
        if tok.head == 0:
            continue
        head = toks[tok.head - 1]
        yield head.form, tok.form, f"{tok.form}/{tok.deprel}"
        yield tok.form, head.form, f"{head.form}/{tok.deprel}{INVERSE_SUFFIX}"


def dep_pairs(
    sentence: ParsedSentence,
    word_vocab: Vocabulary,
    ctx_vocab: Vocabulary | ContextVocabBuilder,
    stats: PairStats | None = None,
) -> Iterator[WeightedPair]:
    """Emit syntactic pairs for one (already collapsed) sentence.

    Edges with either endpoint outside ``word_vocab`` are skipped silently
    (counted in ``stats``), as are contexts that a frozen ``ctx_vocab`` does
    not contain. Passing a :class:`ContextVocabBuilder` interns every
    context instead.
    """
    for target_form, other_form, context in dep_context_items(sentence):
        t = word_vocab.id(target_form)
        if t is None or other_form not in word_vocab:
            if stats is not None:
                stats.oov_skipped += 1
            continue
        c = ctx_vocab.id(context)
        if c is None:
            if stats is not None:
                stats.oov_skipped += 1
            continue
        if stats is not None:
            stats.emitted += 1
        yield WeightedPair(t, c, 1.0)


def sub_pairs(
    vectors: Iterable[SubstituteVector],
    cap_per_type: int = 20000,
    rng: np.random.Generator | None = None,
    stats: PairStats | None = None,
) -> Iterator[WeightedPair]:
    """Convert substitute vectors into weighted (target, substitute) pairs.

    At most ``cap_per_type`` vectors contribute per target word type,
    selected by reservoir sampling over the stream (one ``rng.integers(0, n)``
    draw per candidate beyond the cap, in stream order) to avoid corpus-order
    bias. Selected vectors emit their pairs in original stream order.

    Vectors whose probabilities do not sum to 1 within ``1e-6`` raise a
    ValueError naming the occurrence. Vectors without a resolvable target
    (out-of-vocabulary token at the slot) are skipped and counted.
    """
    if cap_per_type < 1:
        raise ValueError(f"cap_per_type must be >= 1, got {cap_per_type}")
    if rng is None:
        rng = np.random.default_rng(0)

    # reservoir per target type: list of (arrival index, vector)
    reservoirs: dict[int, list[tuple[int, SubstituteVector]]] = {}
    seen: dict[int, int] = {}
    arrival = 0
    for vec in vectors:
        total = sum(p for _, p in vec.entries)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(
                f"substitute vector at sentence {vec.sent_idx} position {vec.pos} "
                f"has probability sum {total!r}, expected 1"
            )
        if any(p <= 0.0 for _, p in vec.entries):
            raise ValueError(
                f"substitute vector at sentence {vec.sent_idx} position {vec.pos} "
                "has a non-positive probability"
            )
        if vec.target is None:
            if stats is not None:
                stats.oov_skipped += 1
            continue
        n_seen = seen.get(vec.target, 0) + 1
        seen[vec.target] = n_seen
        res = reservoirs.setdefault(vec.target, [])
        if n_seen <= cap_per_type:
            res.append((arrival, vec))
        else:
            j = int(rng.integers(0, n_seen))
            if j < cap_per_type:
                res[j] = (arrival, vec)
        arrival += 1

    selected = sorted((item for res in reservoirs.values() for item in res))
    for _, vec in selected:
        for sub, p in vec.entries:
            if stats is not None:
                stats.emitted += 1
            yield WeightedPair(vec.target, sub, p)


def write_pairs(path: str | Path, pairs: Iterable[tuple[str, str, float]]) -> int:
    """Write "target<TAB>context<TAB>weight" lines; the weight column is
    omitted when it equals 1. Returns the number of lines written."""
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for target, context, weight in pairs:
            if weight == 1.0:
                f.write(f"{target}\t{context}\n")
            else:
                f.write(f"{target}\t{context}\t{weight!r}\n")
            n += 1
    return n


def read_pairs(path: str | Path) -> Iterator[tuple[str, str, float]]:
    """Stream (target, context, weight) rows from a pair file."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) == 2:
                yield cols[0], cols[1], 1.0
            elif len(cols) == 3:
                yield cols[0], cols[1], float(cols[2])
            else:
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 columns, got {len(cols)}")
