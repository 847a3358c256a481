from collections import Counter

import numpy as np
import pytest

from ctxembed.corpus import (
    ParsedSentence,
    ReadStats,
    Token,
    Vocabulary,
    build_vocab,
    load_conllu,
    load_tokenized,
    shuffle_sentences,
    write_conllu,
)


class TestBuildVocab:
    def test_threshold_drops_rare_words(self):
        vocab = build_vocab([["a", "a", "b"]], min_count=2)
        assert vocab.words == ["a"]
        assert vocab.counts == [2]
        assert "b" not in vocab

    def test_tie_break_is_lexicographic(self):
        vocab = build_vocab([["a", "b"], ["b", "a"]], min_count=1)
        assert vocab.words == ["a", "b"]
        assert vocab.counts == [2, 2]
        assert vocab.id("a") == 0 and vocab.id("b") == 1

    def test_counts_match_hash_map_oracle(self):
        rng = np.random.default_rng(7)
        words = [f"w{i}" for i in range(40)]
        corpus = [
            [words[j] for j in rng.integers(0, len(words), size=rng.integers(1, 12))]
            for _ in range(1000)
        ]
        oracle = Counter()
        for sent in corpus:
            for tok in sent:
                oracle[tok] += 1
        vocab = build_vocab(corpus, min_count=1)
        assert {w: c for w, c in zip(vocab.words, vocab.counts)} == dict(oracle)

    def test_id_order_descending_count(self):
        vocab = build_vocab([["x"] * 5 + ["y"] * 3 + ["z"] * 5], min_count=1)
        assert vocab.words == ["x", "z", "y"]

    def test_dense_ids_and_index_consistency(self):
        vocab = build_vocab([["c", "b", "a", "b"]], min_count=1)
        for i, w in enumerate(vocab.words):
            assert vocab.index[w] == i

    def test_retained_counts_bounded_by_total(self):
        corpus = [["a", "a", "b", "c"], ["a", "d"]]
        vocab = build_vocab(corpus, min_count=2)
        assert sum(vocab.counts) <= vocab.total_tokens
        full = build_vocab(corpus, min_count=1)
        assert sum(full.counts) == full.total_tokens == 6

    def test_deterministic(self):
        corpus = [["q", "r", "q"], ["s", "r"]]
        v1 = build_vocab(corpus, min_count=1)
        v2 = build_vocab(corpus, min_count=1)
        assert v1.words == v2.words and v1.counts == v2.counts

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            build_vocab([], min_count=1)

    def test_zero_min_count_rejected(self):
        with pytest.raises(ValueError, match="min_count"):
            build_vocab([["a"]], min_count=0)

    def test_save_load_round_trip(self, tmp_path):
        vocab = build_vocab([["b", "a", "b", "c", "b"]], min_count=1)
        path = tmp_path / "vocab.tsv"
        vocab.save(path)
        loaded = Vocabulary.load(path)
        assert loaded.words == vocab.words
        assert loaded.counts == vocab.counts


class TestLoadTokenized:
    def test_lowercases(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("The Dog\n", encoding="utf-8")
        assert list(load_tokenized(p)) == [["the", "dog"]]

    def test_blank_lines_skipped_and_counted(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("a b\n\n  \nc\n", encoding="utf-8")
        stats = ReadStats()
        sents = list(load_tokenized(p, stats))
        assert sents == [["a", "b"], ["c"]]
        assert stats.skipped_lines == 2
        assert stats.sentences == 2

    def test_preserves_file_order(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("one\ntwo\nthree\n", encoding="utf-8")
        assert list(load_tokenized(p)) == [["one"], ["two"], ["three"]]

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            list(load_tokenized(tmp_path / "nope.txt"))


class TestLoadConllu:
    def test_minimal_four_column_block(self, tmp_path):
        p = tmp_path / "p.conllu"
        p.write_text("1\tDog\t2\tnsubj\n2\tbarks\t0\troot\n\n", encoding="utf-8")
        (sent,) = list(load_conllu(p))
        assert sent.tokens == (Token("dog", 2, "nsubj"), Token("barks", 0, "root"))

    def test_ten_column_rows(self, tmp_path):
        p = tmp_path / "p.conllu"
        row1 = "1\tDog\tdog\tNOUN\tNN\t_\t2\tnsubj\t_\t_\n"
        row2 = "2\tbarks\tbark\tVERB\tVBZ\t_\t0\troot\t_\t_\n"
        p.write_text(row1 + row2 + "\n", encoding="utf-8")
        (sent,) = list(load_conllu(p))
        assert sent.tokens == (Token("dog", 2, "nsubj"), Token("barks", 0, "root"))

    def test_range_id_rows_ignored(self, tmp_path):
        p = tmp_path / "p.conllu"
        p.write_text(
            "1\tDog\t2\tnsubj\n3-4\tdoesnt\t_\t_\n2\tbarks\t0\troot\n\n",
            encoding="utf-8",
        )
        (sent,) = list(load_conllu(p))
        assert len(sent) == 2

    def test_out_of_range_head_rejects_sentence_but_stream_continues(self, tmp_path):
        p = tmp_path / "p.conllu"
        bad = "1\ta\t9\tdet\n2\tb\t0\troot\n"
        good = "1\tc\t0\troot\n"
        p.write_text(bad + "\n" + good + "\n", encoding="utf-8")
        stats = ReadStats()
        sents = list(load_conllu(p, stats))
        assert [s.forms() for s in sents] == [["c"]]
        assert stats.rejected_sentences == 1

    def test_self_head_rejected(self, tmp_path):
        p = tmp_path / "p.conllu"
        p.write_text("1\ta\t1\tdet\n\n", encoding="utf-8")
        assert list(load_conllu(p)) == []

    def test_rootless_sentence_rejected(self, tmp_path):
        p = tmp_path / "p.conllu"
        p.write_text("1\ta\t2\tdet\n2\tb\t1\tdep\n\n", encoding="utf-8")
        assert list(load_conllu(p)) == []

    def test_comments_skipped(self, tmp_path):
        p = tmp_path / "p.conllu"
        p.write_text("# sent_id = 1\n1\ta\t0\troot\n\n", encoding="utf-8")
        assert len(list(load_conllu(p))) == 1

    def test_write_read_round_trip(self, tmp_path):
        sentences = [
            ParsedSentence((Token("dog", 2, "nsubj"), Token("barks", 0, "root"))),
            ParsedSentence((Token("it", 2, "nsubj"), Token("rains", 0, "root"),
                            Token("here", 2, "advmod"))),
        ]
        p = tmp_path / "p.conllu"
        write_conllu(sentences, p)
        assert list(load_conllu(p)) == sentences


class TestShuffle:
    def test_same_seed_identical(self):
        corpus = [[w] for w in "abcdefghij"]
        assert shuffle_sentences(corpus, 3) == shuffle_sentences(corpus, 3)

    def test_is_permutation(self):
        corpus = [[str(i)] for i in range(50)]
        out = shuffle_sentences(corpus, 11)
        assert sorted(out) == sorted(corpus)

    def test_distinct_seeds_differ(self):
        corpus = [[str(i)] for i in range(100)]
        orders = {tuple(map(tuple, shuffle_sentences(corpus, seed))) for seed in range(10)}
        assert len(orders) == 10
