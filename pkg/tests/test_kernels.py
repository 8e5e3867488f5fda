import numpy as np
import pytest

from bitextkit import kernels


def _random_case(rng):
    dim = int(rng.integers(2, 24))
    n_q = int(rng.integers(1, 30))
    n_c = int(rng.integers(1, 40))
    q = rng.standard_normal((n_q, dim))
    c = rng.standard_normal((n_c, dim))
    threshold = float(rng.uniform(-0.2, 0.9))
    return q, c, threshold


@pytest.mark.skipif(len(kernels.available_backends()) < 2,
                    reason="native extension not built")
class TestBackendEquivalence:
    def test_dense(self):
        rng = np.random.default_rng(42)
        for _ in range(60):
            q, c, threshold = _random_case(rng)
            idx_n, score_n = kernels.argmax_cosine(q, c, threshold, backend="native")
            idx_p, score_p = kernels.argmax_cosine(q, c, threshold, backend="pure")
            assert np.array_equal(idx_n, idx_p)
            both = idx_n >= 0
            assert np.allclose(score_n[both], score_p[both], atol=1e-12)

    def test_subsets(self):
        rng = np.random.default_rng(43)
        for _ in range(60):
            q, c, threshold = _random_case(rng)
            offsets = [0]
            cand_idx = []
            for _ in range(q.shape[0]):
                take = rng.random(c.shape[0]) < 0.5
                chosen = np.nonzero(take)[0]
                cand_idx.extend(chosen)
                offsets.append(len(cand_idx))
            args = (q, c, np.array(offsets), np.array(cand_idx, dtype=np.int64), threshold)
            idx_n, score_n = kernels.argmax_cosine_subsets(*args, backend="native")
            idx_p, score_p = kernels.argmax_cosine_subsets(*args, backend="pure")
            assert np.array_equal(idx_n, idx_p)
            both = idx_n >= 0
            assert np.allclose(score_n[both], score_p[both], atol=1e-12)


class TestSemantics:
    def test_matches_full_matrix_argmax(self, kernel_backend):
        rng = np.random.default_rng(5)
        for _ in range(40):
            q, c, threshold = _random_case(rng)
            idx, score = kernels.argmax_cosine(q, c, threshold)
            sims = (q / np.linalg.norm(q, axis=1, keepdims=True)) @ \
                   (c / np.linalg.norm(c, axis=1, keepdims=True)).T
            expect = np.argmax(sims, axis=1)
            for i in range(q.shape[0]):
                if sims[i, expect[i]] > threshold:
                    assert idx[i] == expect[i]
                    assert score[i] == pytest.approx(sims[i, expect[i]], abs=1e-10)
                else:
                    assert idx[i] == -1 and np.isnan(score[i])

    def test_tie_prefers_lowest_index(self, kernel_backend):
        q = np.array([[2.0, 0.0]])
        c = np.array([[3.0, 0.0], [1.0, 0.0], [0.5, 0.0]])
        idx, score = kernels.argmax_cosine(q, c, 0.5)
        assert idx[0] == 0 and score[0] == pytest.approx(1.0)

    def test_zero_norm_candidate_skipped(self, kernel_backend):
        q = np.array([[1.0, 0.0]])
        c = np.array([[0.0, 0.0], [0.8, 0.1]])
        idx, _ = kernels.argmax_cosine(q, c, 0.5)
        assert idx[0] == 1

    def test_zero_norm_query_never_matches(self, kernel_backend):
        q = np.zeros((1, 2))
        c = np.array([[1.0, 0.0]])
        idx, score = kernels.argmax_cosine(q, c, -1.5)
        assert idx[0] == -1 and np.isnan(score[0])

    def test_threshold_is_strict(self, kernel_backend):
        q = np.array([[1.0, 0.0]])
        c = np.array([[0.5, 0.0]])
        idx, _ = kernels.argmax_cosine(q, c, 1.0)
        assert idx[0] == -1

    def test_empty_subset_no_match(self, kernel_backend):
        q = np.array([[1.0, 0.0], [0.0, 1.0]])
        c = np.array([[1.0, 0.0]])
        idx, _ = kernels.argmax_cosine_subsets(
            q, c, np.array([0, 0, 1]), np.array([0], dtype=np.int64), -1.5)
        assert idx[0] == -1 and idx[1] == 0

    def test_subset_restricts_candidates(self, kernel_backend):
        q = np.array([[1.0, 0.0]])
        c = np.array([[1.0, 0.0], [0.9, 0.1]])
        idx, _ = kernels.argmax_cosine_subsets(
            q, c, np.array([0, 1]), np.array([1], dtype=np.int64), 0.0)
        assert idx[0] == 1

    def test_backend_selection_reporting(self):
        assert kernels.backend_name() in ("native", "pure")
        with pytest.raises(ValueError):
            kernels.set_backend("bogus")
