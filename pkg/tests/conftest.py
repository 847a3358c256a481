from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def toy_corpus_path() -> Path:
    return DATA_DIR / "toy_corpus.txt"


@pytest.fixture(scope="session")
def toy_parses_path() -> Path:
    return DATA_DIR / "toy_parses.conllu"
