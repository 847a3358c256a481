import numpy as np
import pytest

from ctxembed.embeddings import EmbeddingSet


def test_round_trip_exact(tmp_path):
    rng = np.random.default_rng(0)
    e = EmbeddingSet(["alpha", "beta", "gamma"], rng.normal(size=(3, 4)))
    path = tmp_path / "e.vec"
    e.save_text(path)
    loaded = EmbeddingSet.load_text(path)
    assert loaded.words == e.words
    assert np.array_equal(loaded.vectors, e.vectors)  # repr round-trips floats


def test_header_present(tmp_path):
    e = EmbeddingSet(["a"], np.array([[1.5, -2.25]]))
    path = tmp_path / "e.vec"
    e.save_text(path)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "1 2"


def test_headerless_file_accepted(tmp_path):
    path = tmp_path / "e.vec"
    path.write_text("dog 1.0 2.0\ncat 3.0 4.0\n", encoding="utf-8")
    loaded = EmbeddingSet.load_text(path)
    assert loaded.words == ["dog", "cat"]
    assert loaded.dim == 2


def test_inconsistent_rows_rejected(tmp_path):
    path = tmp_path / "e.vec"
    path.write_text("dog 1.0 2.0\ncat 3.0\n", encoding="utf-8")
    with pytest.raises(ValueError, match="inconsistent"):
        EmbeddingSet.load_text(path)


def test_duplicate_words_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        EmbeddingSet(["a", "a"], np.zeros((2, 2)))


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError, match="match"):
        EmbeddingSet(["a", "b"], np.zeros((3, 2)))


def test_lookup():
    e = EmbeddingSet(["x", "y"], np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert "x" in e and "z" not in e
    assert np.array_equal(e.get("y"), [0.0, 1.0])
    assert len(e) == 2 and e.dim == 2
