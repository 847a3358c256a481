import numpy as np
import pytest

from ctxembed.combine import (
    CcaModel,
    cca_apply,
    cca_fit,
    concat,
    svd_reduce,
    tune_cca,
    write_tuning_report,
)
from ctxembed.embeddings import EmbeddingSet
from ctxembed.evaluate import WordPairDataset, cosine


def embed(words, matrix):
    return EmbeddingSet(words, np.asarray(matrix, dtype=np.float64))


def random_embed(rng, n, d, prefix="w"):
    return embed([f"{prefix}{i}" for i in range(n)], rng.normal(size=(n, d)))


class TestConcat:
    def test_dims_add_up(self):
        rng = np.random.default_rng(0)
        a = random_embed(rng, 5, 300)
        b = embed(a.words, rng.normal(size=(5, 300)))
        assert concat(a, b).dim == 600

    def test_self_concat_preserves_cosines(self):
        rng = np.random.default_rng(1)
        a = random_embed(rng, 6, 7)
        merged = concat(a, a)
        for w1 in a.words:
            for w2 in a.words:
                assert cosine(merged.get(w1), merged.get(w2)) == pytest.approx(
                    cosine(a.get(w1), a.get(w2)), abs=1e-12)

    def test_vocabulary_intersection(self):
        a = embed(["a", "b", "c"], np.eye(3))
        b = embed(["b", "c", "d"], np.eye(3))
        merged = concat(a, b)
        assert merged.words == ["b", "c"]

    def test_rows_are_stacked_in_order(self):
        a = embed(["a", "b"], [[1.0, 2.0], [3.0, 4.0]])
        b = embed(["b", "a"], [[9.0], [8.0]])
        merged = concat(a, b)
        assert np.array_equal(merged.get("a"), [1.0, 2.0, 8.0])
        assert np.array_equal(merged.get("b"), [3.0, 4.0, 9.0])

    def test_empty_intersection_rejected(self):
        with pytest.raises(ValueError, match="intersect"):
            concat(embed(["a"], [[1.0]]), embed(["b"], [[1.0]]))

    def test_zero_padding_preserves_cosine_structure(self):
        rng = np.random.default_rng(2)
        a = random_embed(rng, 5, 6)
        zeros = embed(a.words, np.zeros((5, 4)))
        merged = concat(a, zeros)
        for w1 in a.words:
            for w2 in a.words:
                assert cosine(merged.get(w1), merged.get(w2)) == pytest.approx(
                    cosine(a.get(w1), a.get(w2)), abs=1e-12)


class TestSvdReduce:
    def test_full_k_preserves_dot_products(self):
        rng = np.random.default_rng(3)
        e = random_embed(rng, 12, 6)
        out = svd_reduce(e, k=6, power=1.0, center=False)
        np.testing.assert_allclose(out.vectors @ out.vectors.T,
                                   e.vectors @ e.vectors.T, atol=1e-6)

    def test_rank_one_reconstruction(self):
        u = np.array([1.0, -2.0, 0.5, 3.0])
        v = np.array([0.5, 1.0, -1.0])
        e = embed(["a", "b", "c", "d"], np.outer(u, v))
        out = svd_reduce(e, k=1, power=1.0, center=False)
        coeff, *_ = np.linalg.lstsq(out.vectors, e.vectors, rcond=None)
        np.testing.assert_allclose(out.vectors @ coeff, e.vectors, atol=1e-6)

    def test_frobenius_error_matches_eigendecomposition_oracle(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(50, 10))
        e = embed([f"w{i}" for i in range(50)], X)
        k = 4
        out = svd_reduce(e, k=k, power=1.0, center=False)
        err = np.sqrt(np.linalg.norm(X) ** 2 - np.linalg.norm(out.vectors) ** 2)
        evals = np.linalg.eigvalsh(X.T @ X)[::-1]
        oracle = np.sqrt(evals[k:].sum())
        assert err == pytest.approx(oracle, abs=1e-8)

    def test_columns_orthogonal_after_centering(self):
        rng = np.random.default_rng(5)
        e = random_embed(rng, 30, 8)
        out = svd_reduce(e, k=5, power=1.0, center=True)
        gram = out.vectors.T @ out.vectors
        off_diag = gram - np.diag(np.diag(gram))
        assert np.abs(off_diag).max() < 1e-8 * np.abs(gram).max()

    def test_k_beyond_rank_pads_with_zeros(self, caplog):
        u = np.array([1.0, 2.0, 3.0])
        e = embed(["a", "b", "c"], np.outer(u, [1.0, 1.0, 1.0, 1.0]))
        with caplog.at_level("WARNING"):
            out = svd_reduce(e, k=3, power=1.0, center=False)
        assert "rank" in caplog.text
        assert np.allclose(out.vectors[:, 1:], 0.0)

    def test_power_zero_gives_unit_columns(self):
        rng = np.random.default_rng(6)
        e = random_embed(rng, 20, 5)
        out = svd_reduce(e, k=3, power=0.0, center=False)
        np.testing.assert_allclose(np.linalg.norm(out.vectors, axis=0), 1.0, atol=1e-10)

    def test_bad_k_rejected(self):
        e = embed(["a"], [[1.0, 2.0]])
        with pytest.raises(ValueError):
            svd_reduce(e, k=3)


def hadamard_views():
    """Two exactly-constructed views with known canonical correlations.

    Columns are orthogonal Hadamard-style vectors over 8 points, so the
    covariances come out exactly diagonal and the canonical correlations are
    the mixing coefficients by construction.
    """
    h1 = np.array([1, 1, 1, 1, -1, -1, -1, -1], dtype=float)
    h2 = np.array([1, 1, -1, -1, 1, 1, -1, -1], dtype=float)
    g1 = np.array([1, -1, 1, -1, 1, -1, 1, -1], dtype=float)
    g2 = np.array([1, -1, -1, 1, 1, -1, -1, 1], dtype=float)
    rho1, rho2 = 0.9, 0.4
    X = np.stack([h1, h2], axis=1)
    Y = np.stack([rho1 * h1 + np.sqrt(1 - rho1 ** 2) * g1,
                  rho2 * h2 + np.sqrt(1 - rho2 ** 2) * g2], axis=1)
    words = [f"p{i}" for i in range(8)]
    return embed(words, X), embed(words, Y), (rho1, rho2)


class TestCca:
    def test_identical_views_fully_correlated(self):
        rng = np.random.default_rng(7)
        a = random_embed(rng, 40, 6)
        b = embed(a.words, a.vectors.copy())
        model = cca_fit(a, b, k=4, rx=1e-8, ry=1e-8)
        np.testing.assert_allclose(model.correlations, 1.0, atol=1e-3)

    def test_orthogonal_map_fully_correlated(self):
        rng = np.random.default_rng(8)
        a = random_embed(rng, 40, 6)
        R, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        b = embed(a.words, a.vectors @ R)
        model = cca_fit(a, b, k=6, rx=1e-8, ry=1e-8)
        np.testing.assert_allclose(model.correlations, 1.0, atol=1e-3)

    def test_closed_form_two_dimensional_oracle(self):
        a, b, (rho1, rho2) = hadamard_views()
        model = cca_fit(a, b, k=2, rx=0.0, ry=0.0)
        np.testing.assert_allclose(model.correlations, [rho1, rho2], atol=1e-10)

    def test_correlations_sorted_and_bounded(self):
        rng = np.random.default_rng(9)
        a = random_embed(rng, 60, 8)
        b = embed(a.words, rng.normal(size=(60, 5)))
        model = cca_fit(a, b, k=5, rx=1e-6, ry=1e-6)
        corr = model.correlations
        assert all(x >= y for x, y in zip(corr, corr[1:]))
        assert np.all(corr >= 0.0) and np.all(corr <= 1.0 + 1e-8)

    def test_apply_reproduces_training_correlations(self):
        a, b, _ = hadamard_views()
        model = cca_fit(a, b, k=2, rx=0.0, ry=0.0)
        pa = cca_apply(model, a, view="x").vectors
        pb = cca_apply(model, b, view="y").vectors
        for i in range(2):
            x, y = pa[:, i], pb[:, i]
            corr = (x @ y) / np.sqrt((x @ x) * (y @ y))
            assert corr == pytest.approx(model.correlations[i], abs=1e-6)

    def test_invariant_to_invertible_transforms(self):
        rng = np.random.default_rng(10)
        a = random_embed(rng, 80, 10)
        b = embed(a.words, rng.normal(size=(80, 10)))
        base = cca_fit(a, b, k=4, rx=1e-10, ry=1e-10).correlations
        T = rng.normal(size=(10, 10)) + 3.0 * np.eye(10)
        a2 = embed(a.words, a.vectors @ T)
        transformed = cca_fit(a2, b, k=4, rx=1e-10, ry=1e-10).correlations
        np.testing.assert_allclose(base, transformed, atol=1e-6)

    def test_singular_view_without_regularization_advises(self):
        rng = np.random.default_rng(11)
        base = rng.normal(size=(30, 3))
        a = embed([f"w{i}" for i in range(30)],
                  np.hstack([base, base[:, :1]]))  # duplicated column
        b = embed(a.words, rng.normal(size=(30, 4)))
        with pytest.raises(np.linalg.LinAlgError, match="regulariz"):
            cca_fit(a, b, k=2, rx=0.0, ry=0.0)

    def test_dimension_mismatch_on_apply(self):
        a, b, _ = hadamard_views()
        model = cca_fit(a, b, k=1, rx=0.0, ry=0.0)
        wrong = embed(["q"], [[1.0, 2.0, 3.0]])
        with pytest.raises(ValueError, match="dim"):
            cca_apply(model, wrong, view="x")

    def test_zero_k_rejected(self):
        a, b, _ = hadamard_views()
        with pytest.raises(ValueError):
            cca_fit(a, b, k=0)

    def test_needs_more_words_than_k(self):
        a = embed(["a", "b"], np.eye(2))
        b = embed(["a", "b"], np.eye(2))
        with pytest.raises(ValueError, match="shared words"):
            cca_fit(a, b, k=2)

    def test_save_load_round_trip(self, tmp_path):
        a, b, _ = hadamard_views()
        model = cca_fit(a, b, k=2, rx=1e-9, ry=1e-9)
        path = tmp_path / "model.cca"
        model.save(path)
        loaded = CcaModel.load(path)
        for attr in ("mean_x", "mean_y", "Px", "Py", "correlations"):
            assert np.array_equal(getattr(loaded, attr), getattr(model, attr))
        assert loaded.rx == model.rx and loaded.ry == model.ry


class TestTuneCca:
    def make_inputs(self):
        rng = np.random.default_rng(12)
        a = random_embed(rng, 50, 6)
        b = embed(a.words, a.vectors @ rng.normal(size=(6, 6)) + 0.05 * rng.normal(size=(50, 6)))
        pairs = []
        words = a.words
        for i in range(0, 20, 2):
            pairs.append((words[i], words[i + 1], cosine(a.get(words[i]), a.get(words[i + 1]))))
        return a, b, WordPairDataset(pairs)

    def test_single_cell_grid(self):
        a, b, ds = self.make_inputs()
        model, report = tune_cca(a, b, ds, k_grid=[2], r_grid=[1e-4])
        assert len(report) == 1
        assert model.k == 2 and model.rx == 1e-4

    def test_report_covers_grid(self):
        a, b, ds = self.make_inputs()
        _, report = tune_cca(a, b, ds, k_grid=[1, 2, 3], r_grid=[1e-6, 1e-3])
        assert len(report) == 6

    def test_selected_cell_attains_max(self):
        a, b, ds = self.make_inputs()
        model, report = tune_cca(a, b, ds, k_grid=[1, 2, 4], r_grid=[1e-8, 1e-2])
        best = max(score for _, _, score in report)
        winning = [(k, r) for k, r, score in report if score == best]
        assert (model.k, model.rx) in winning

    def test_empty_grid_rejected(self):
        a, b, ds = self.make_inputs()
        with pytest.raises(ValueError, match="grid"):
            tune_cca(a, b, ds, k_grid=[], r_grid=[1e-4])

    def test_report_file(self, tmp_path):
        path = tmp_path / "report.tsv"
        write_tuning_report(path, [(2, 1e-4, 0.5)])
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "k\tr\tspearman"
        assert lines[1].startswith("2\t0.0001\t0.5")


class TestLengthNormalize:
    def test_rows_become_unit_norm(self):
        from ctxembed.combine import length_normalize

        rng = np.random.default_rng(20)
        e = random_embed(rng, 10, 4)
        out = length_normalize(e)
        np.testing.assert_allclose(np.linalg.norm(out.vectors, axis=1), 1.0, atol=1e-12)

    def test_zero_rows_preserved(self):
        from ctxembed.combine import length_normalize

        e = embed(["a", "b"], [[0.0, 0.0], [3.0, 4.0]])
        out = length_normalize(e)
        assert np.array_equal(out.get("a"), [0.0, 0.0])
        np.testing.assert_allclose(out.get("b"), [0.6, 0.8], atol=1e-12)
