"""Corpus ingestion: sentence streams, dependency parses, and vocabularies."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Token:
    """One token of a dependency-parsed sentence.

    ``head`` is the 1-based index of the governor within the sentence,
    with 0 marking a root (or a detached token, see
    :func:`ctxembed.contexts.collapse_prepositions`).
    """

    form: str
    head: int
    deprel: str


@dataclass(frozen=True)
class ParsedSentence:
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]


@dataclass
class ReadStats:
    """Counters accumulated while streaming a corpus file."""

    sentences: int = 0
    skipped_lines: int = 0
    rejected_sentences: int = 0


class Vocabulary:
    """Dense word<->id map with occurrence counts.

    Ids are assigned 0..V-1 in descending count order, ties broken
    lexicographically, so runs are reproducible and the negative-sampling
    table stays cache-friendly. ``total_tokens`` counts every corpus token,
    including occurrences of words that fell below ``min_count``.
    """

    __slots__ = ("words", "index", "counts", "total_tokens", "min_count")

    def __init__(
        self,
        words: Sequence[str],
        counts: Sequence[int],
        total_tokens: int,
        min_count: int = 1,
    ):
        if len(words) != len(counts):
            raise ValueError("words and counts must have equal length")
        self.words = list(words)
        self.counts = list(counts)
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate words in vocabulary")
        self.total_tokens = total_tokens
        self.min_count = min_count

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def id(self, word: str) -> int | None:
        """Return the id of ``word`` or None if it is out of vocabulary."""
        return self.index.get(word)

    def word(self, wid: int) -> str:
        return self.words[wid]

    def to_ids(self, tokens: Iterable[str]) -> list[int]:
        """Map tokens to ids, dropping out-of-vocabulary tokens."""
        idx = self.index
        return [idx[t] for t in tokens if t in idx]

    def save(self, path: str | Path) -> None:
        """Write "word<TAB>count" lines in id order."""
        with open(path, "w", encoding="utf-8") as f:
            for w, c in zip(self.words, self.counts):
                f.write(f"{w}\t{c}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        """Read a vocabulary file written by :meth:`save`.

        The file does not carry ``total_tokens`` (dropped words are gone),
        so the loaded value is the sum of retained counts, and ``min_count``
        is reset to 1.
        """
        words: list[str] = []
        counts: list[int] = []
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'word<TAB>count', got {line!r}")
                words.append(parts[0])
                counts.append(int(parts[1]))
        return cls(words, counts, total_tokens=sum(counts), min_count=1)


def build_vocab(corpus: Iterable[Sequence[str]], min_count: int) -> Vocabulary:
    """Count tokens over ``corpus`` and keep words occurring >= ``min_count`` times.

    The corpus must be finite. Words below the threshold are dropped entirely
    (no unknown-word placeholder).
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counter: Counter[str] = Counter()
    total = 0
    for sent in corpus:
        counter.update(sent)
        total += len(sent)
    if total == 0:
        raise ValueError("empty corpus")
    items = sorted(
        ((w, c) for w, c in counter.items() if c >= min_count),
        key=lambda wc: (-wc[1], wc[0]),
    )
    return Vocabulary(
        [w for w, _ in items],
        [c for _, c in items],
        total_tokens=total,
        min_count=min_count,
    )


def load_tokenized(path: str | Path, stats: ReadStats | None = None) -> Iterator[list[str]]:
    """Stream sentences from a one-sentence-per-line, space-separated file.

    Tokens are lowercased. Lines that are empty after trimming are skipped
    (counted in ``stats.skipped_lines`` when given).
    """
    with open(path, encoding="utf-8") as f:
        for line in f:
            toks = line.split()
            if not toks:
                if stats is not None:
                    stats.skipped_lines += 1
                continue
            if stats is not None:
                stats.sentences += 1
            yield [t.lower() for t in toks]


def _parse_conllu_block(
    lines: list[tuple[int, str]], path: str, stats: ReadStats | None
) -> ParsedSentence | None:
    rows: list[tuple[str, int, str]] = []
    for lineno, line in lines:
        cols = line.split("\t")
        if len(cols) >= 8:
            id_col, form, head, deprel = cols[0], cols[1], cols[6], cols[7]
        elif len(cols) == 4:
            id_col, form, head, deprel = cols
        else:
            logger.warning("%s:%d: unparseable row (%d columns), sentence rejected", path, lineno, len(cols))
            if stats is not None:
                stats.rejected_sentences += 1
            return None
        try:
            tid = int(id_col)
        except ValueError:
            # multiword-token ranges ("3-4") and empty nodes ("5.1")
            continue
        try:
            head_i = int(head)
        except ValueError:
            logger.warning("%s:%d: non-integer HEAD %r, sentence rejected", path, lineno, head)
            if stats is not None:
                stats.rejected_sentences += 1
            return None
        if tid != len(rows) + 1:
            logger.warning("%s:%d: non-contiguous token id %d, sentence rejected", path, lineno, tid)
            if stats is not None:
                stats.rejected_sentences += 1
            return None
        rows.append((form.lower(), head_i, deprel))
    if not rows:
        return None
    n = len(rows)
    for i, (_, head_i, _) in enumerate(rows, start=1):
        if head_i < 0 or head_i > n or head_i == i:
            logger.warning("%s: HEAD=%d out of range in %d-token sentence, rejected", path, head_i, n)
            if stats is not None:
                stats.rejected_sentences += 1
            return None
    if not any(head_i == 0 for _, head_i, _ in rows):
        logger.warning("%s: sentence without root rejected", path)
        if stats is not None:
            stats.rejected_sentences += 1
        return None
    if stats is not None:
        stats.sentences += 1
    return ParsedSentence(tuple(Token(f, h, d) for f, h, d in rows))


def load_conllu(path: str | Path, stats: ReadStats | None = None) -> Iterator[ParsedSentence]:
    """Stream dependency parses from a CoNLL-U-style file.

    Accepts full 10-column CoNLL-U (ID, FORM, ..., HEAD, DEPREL at the usual
    positions) or a minimal 4-column ID/FORM/HEAD/DEPREL layout. Forms are
    lowercased. Rows with non-integer ids (multiword tokens, empty nodes) are
    ignored; sentences with an out-of-range HEAD are rejected with a logged
    diagnostic and the stream continues.
    """
    block: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n")
            if line.startswith("#"):
                continue
            if not line.strip():
                if block:
                    sent = _parse_conllu_block(block, str(path), stats)
                    block = []
                    if sent is not None:
                        yield sent
                continue
            block.append((lineno, line))
    if block:
        sent = _parse_conllu_block(block, str(path), stats)
        if sent is not None:
            yield sent


def write_conllu(sentences: Iterable[ParsedSentence], path: str | Path) -> None:
    """Write parses in the minimal 4-column layout read by :func:`load_conllu`."""
    with open(path, "w", encoding="utf-8") as f:
        for sent in sentences:
            for i, tok in enumerate(sent, start=1):
                f.write(f"{i}\t{tok.form}\t{tok.head}\t{tok.deprel}\n")
            f.write("\n")


def shuffle_sentences(corpus: Iterable, seed: int) -> list:
    """Return a deterministic pseudo-random permutation of ``corpus``.

    The corpus is materialized; this is an in-memory shuffle.
    """
    sentences = list(corpus)
    rng = np.random.default_rng(seed)
    return [sentences[i] for i in rng.permutation(len(sentences))]
