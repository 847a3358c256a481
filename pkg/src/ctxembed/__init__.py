"""Skip-gram word embeddings from window, dependency, and substitute contexts.

The package is organized as a pipeline:

- :mod:`ctxembed.corpus` ingests tokenized and dependency-parsed corpora and
  builds vocabularies,
- :mod:`ctxembed.contexts` turns corpora into weighted target-context pairs
  for three context types (window, dependency, substitute),
- :mod:`ctxembed.lm` trains an interpolated Kneser-Ney n-gram model and
  generates top-k substitute vectors,
- :mod:`ctxembed.sgns` trains skip-gram embeddings with negative sampling
  over arbitrary weighted pair streams,
- :mod:`ctxembed.combine` merges embedding sets (concatenation, SVD, CCA),
- :mod:`ctxembed.evaluate` scores embeddings on word-pair similarity,
  synonym selection, nearest neighbors, and sentence sentiment,
- :mod:`ctxembed.cli` orchestrates everything from the command line.
"""

__version__ = "0.1.0"

from ctxembed.corpus import Vocabulary, build_vocab
from ctxembed.embeddings import EmbeddingSet

__all__ = ["Vocabulary", "build_vocab", "EmbeddingSet", "__version__"]
