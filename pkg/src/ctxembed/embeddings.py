"""Word embedding matrices with text-format persistence."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np


class EmbeddingSet:
    """A vocabulary plus a V x d matrix of word vectors."""

    __slots__ = ("words", "vectors", "index")

    def __init__(self, words: Sequence[str], vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise ValueError(
                f"vector matrix of shape {vectors.shape} does not match {len(words)} words"
            )
        self.words = list(words)
        self.vectors = vectors
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate words in embedding set")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def get(self, word: str) -> np.ndarray:
        return self.vectors[self.index[word]]

    def save_text(self, path: str | Path) -> None:
        """Write "V dim" then one "word v_1 ... v_dim" line per word, with
        full round-trip decimals."""
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"{len(self.words)} {self.dim}\n")
            for w, row in zip(self.words, self.vectors):
                f.write(w + " " + " ".join(repr(float(x)) for x in row) + "\n")

    @classmethod
    def load_text(cls, path: str | Path) -> "EmbeddingSet":
        """Read the text format; tolerates a missing header line.

        A first line of exactly two integer tokens is treated as the header.
        """
        words: list[str] = []
        rows: list[list[float]] = []
        with open(path, encoding="utf-8") as f:
            first = f.readline()
            parts = first.split()
            if not parts:
                raise ValueError(f"{path}: empty embedding file")
            if len(parts) == 2 and all(_is_int(p) for p in parts):
                pass  # header; sizes are re-derived from the data
            else:
                words.append(parts[0])
                rows.append([float(x) for x in parts[1:]])
            for lineno, line in enumerate(f, 2):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) < 2:
                    raise ValueError(f"{path}:{lineno}: expected 'word v_1 ... v_d'")
                words.append(parts[0])
                rows.append([float(x) for x in parts[1:]])
        if not words:
            raise ValueError(f"{path}: no vectors found")
        dims = {len(r) for r in rows}
        if len(dims) != 1:
            raise ValueError(f"{path}: inconsistent vector lengths {sorted(dims)}")
        return cls(words, np.array(rows, dtype=np.float64))


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False
