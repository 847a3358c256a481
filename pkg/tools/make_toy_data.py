"""Regenerate the bundled toy corpus under tests/data/.

The corpus is template text over two topical vocabularies, emitted both as
tokenized lines and as matching 4-column dependency parses, so every
pipeline stage has something meaningful to chew on. Deterministic: rerunning
this script reproduces the same bytes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parent.parent / "tests" / "data"

TOPICS = {
    "sea": {
        "nouns": ["whale", "shark", "dolphin", "sailor", "harbor", "wave",
                  "reef", "tide", "vessel", "anchor", "gull", "storm"],
        "verbs": ["swims", "dives", "drifts", "surfaces", "circles", "follows",
                  "watches", "crosses"],
        "adjs": ["grey", "salty", "deep", "calm", "restless", "northern"],
    },
    "farm": {
        "nouns": ["goat", "barn", "tractor", "farmer", "meadow", "fence",
                  "harvest", "orchard", "rooster", "plough", "stable", "crop"],
        "verbs": ["grazes", "plants", "repairs", "gathers", "feeds", "pulls",
                  "guards", "trims"],
        "adjs": ["green", "muddy", "quiet", "ripe", "wooden", "early"],
    },
}

# (form, head, deprel) with placeholders filled per sentence
TEMPLATES = [
    [("the", 3, "det"), ("ADJ", 3, "amod"), ("N1", 4, "nsubj"), ("V", 0, "root"),
     ("the", 6, "det"), ("N2", 4, "dobj"), ("of", 9, "case"), ("the", 9, "det"),
     ("N3", 6, "nmod")],
    [("the", 2, "det"), ("N1", 3, "nsubj"), ("V", 0, "root"), ("the", 5, "det"),
     ("N2", 3, "dobj")],
    [("the", 3, "det"), ("ADJ", 3, "amod"), ("N1", 4, "nsubj"), ("V", 0, "root")],
    [("the", 2, "det"), ("N1", 3, "nsubj"), ("V", 0, "root"), ("near", 6, "case"),
     ("the", 6, "det"), ("N2", 3, "obl")],
]


def make_sentence(rng: np.random.Generator, topic: dict) -> list[tuple[str, int, str]]:
    template = TEMPLATES[rng.integers(0, len(TEMPLATES))]
    nouns = [topic["nouns"][i] for i in rng.choice(len(topic["nouns"]), size=3, replace=False)]
    verb = topic["verbs"][rng.integers(0, len(topic["verbs"]))]
    adj = topic["adjs"][rng.integers(0, len(topic["adjs"]))]
    fills = {"N1": nouns[0], "N2": nouns[1], "N3": nouns[2], "V": verb, "ADJ": adj}
    return [(fills.get(form, form), head, rel) for form, head, rel in template]


def main() -> None:
    rng = np.random.default_rng(20240601)
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    names = list(TOPICS)
    text_lines = []
    conllu_blocks = []
    while sum(len(l) for l in text_lines) < 49_000:
        topic = TOPICS[names[rng.integers(0, len(names))]]
        sent = make_sentence(rng, topic)
        text_lines.append(" ".join(form for form, _, _ in sent) + "\n")
        conllu_blocks.append(
            "".join(f"{i}\t{form}\t{head}\t{rel}\n" for i, (form, head, rel) in enumerate(sent, 1))
            + "\n"
        )
    (DATA_DIR / "toy_corpus.txt").write_text("".join(text_lines), encoding="utf-8")
    (DATA_DIR / "toy_parses.conllu").write_text("".join(conllu_blocks), encoding="utf-8")
    print(f"wrote {len(text_lines)} sentences "
          f"({sum(len(l) for l in text_lines)} bytes of text)")


if __name__ == "__main__":
    main()
