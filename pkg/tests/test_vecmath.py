import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitextkit.errors import DimensionMismatch, RowCountMismatch, ZeroVector
from bitextkit.vecmath import (EmbeddingMatrix, Match, best_match,
                               cosine_distance, cosine_similarity, l2_normalize)


def finite_vectors(min_dim=1, max_dim=8):
    return st.integers(min_dim, max_dim).flatmap(
        lambda d: st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=d, max_size=d))


def nonzero_vectors(min_dim=1, max_dim=8):
    return finite_vectors(min_dim, max_dim).filter(
        lambda v: math.sqrt(sum(x * x for x in v)) > 1e-6)


class TestNormalize:
    def test_three_four_five(self):
        assert np.allclose(l2_normalize([3, 4]), [0.6, 0.8], atol=1e-12)

    def test_already_unit(self):
        assert np.array_equal(l2_normalize([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0])

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVector):
            l2_normalize([0.0, 0.0])

    def test_nan_rejected(self):
        with pytest.raises(ZeroVector):
            l2_normalize([1.0, float("nan")])

    @given(nonzero_vectors())
    @settings(max_examples=100, deadline=None)
    def test_unit_norm_and_direction(self, v):
        u = l2_normalize(v)
        assert abs(np.linalg.norm(u) - 1.0) < 1e-12
        assert cosine_similarity(u, v) > 1.0 - 1e-9


class TestCosine:
    def test_orthogonal(self):
        assert cosine_similarity([1, 0], [0, 1]) == 0.0

    def test_positive_scaling_same_direction(self):
        assert abs(cosine_similarity([2, 4, 6], [1, 2, 3]) - 1.0) < 1e-12

    def test_closed_form(self):
        assert abs(cosine_similarity([1, 1], [1, 0]) - 1 / math.sqrt(2)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_similarity([1, 0], [1, 0, 0])

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine_similarity([0, 0], [1, 0])

    def test_distance_examples(self):
        assert cosine_distance([2.0, 1.0], [2.0, 1.0]) == pytest.approx(0.0, abs=1e-12)
        assert cosine_distance([1, 0], [0, 1]) == 1.0
        assert abs(cosine_distance([1, 1], [1, 0]) - (1 - 1 / math.sqrt(2))) < 1e-12

    @given(st.tuples(nonzero_vectors(2, 8), nonzero_vectors(2, 8)).filter(
        lambda ab: len(ab[0]) == len(ab[1])))
    @settings(max_examples=150, deadline=None)
    def test_symmetry_and_bound(self, ab):
        a, b = ab
        s1 = cosine_similarity(a, b)
        s2 = cosine_similarity(b, a)
        assert abs(s1 - s2) < 1e-12
        assert abs(s1) <= 1 + 1e-12

    @given(st.tuples(nonzero_vectors(2, 6), nonzero_vectors(2, 6)).filter(
        lambda ab: len(ab[0]) == len(ab[1])),
        st.floats(1e-3, 1e3))
    @settings(max_examples=150, deadline=None)
    def test_positive_scale_invariance(self, ab, alpha):
        a, b = ab
        assert abs(cosine_similarity([alpha * x for x in a], b)
                   - cosine_similarity(a, b)) < 1e-9


class TestEmbeddingMatrix:
    def test_rejects_nan(self):
        with pytest.raises(ZeroVector):
            EmbeddingMatrix(["a"], [[1.0, float("inf")]])

    def test_rejects_duplicate_ids(self):
        with pytest.raises(ValueError):
            EmbeddingMatrix(["a", "a"], [[1.0, 0.0], [0.0, 1.0]])

    def test_rejects_id_count_mismatch(self):
        with pytest.raises(RowCountMismatch):
            EmbeddingMatrix(["a"], [[1.0, 0.0], [0.0, 1.0]])

    def test_rejects_empty(self):
        with pytest.raises(DimensionMismatch):
            EmbeddingMatrix([], np.empty((0, 3)))


class TestBestMatch:
    def test_spec_example(self, kernel_backend):
        cands = EmbeddingMatrix(["a", "b"], [[0.0, 1.0], [0.99, 0.1]])
        m = best_match([1.0, 0.0], cands, 0.7)
        assert m == Match(query_index=0, candidate_index=1, score=pytest.approx(0.9950, abs=1e-4))

    def test_below_threshold_empty(self, kernel_backend):
        cands = EmbeddingMatrix(["a"], [[0.0, 1.0]])
        assert best_match([1.0, 0.0], cands, 0.7) is None

    def test_exactly_at_threshold_is_not_a_match(self, kernel_backend):
        cands = EmbeddingMatrix(["a"], [[0.5, 0.0]])
        assert best_match([1.0, 0.0], cands, 1.0) is None

    def test_tie_breaks_to_lowest_index(self, kernel_backend):
        cands = EmbeddingMatrix(["a", "b"], [[1.0, 0.0], [1.0, 0.0]])
        m = best_match([1.0, 0.0], cands, 0.5)
        assert m.candidate_index == 0

    def test_dimension_mismatch(self):
        cands = EmbeddingMatrix(["a"], [[1.0, 0.0, 0.0]])
        with pytest.raises(DimensionMismatch):
            best_match([1.0, 0.0], cands, 0.5)

    def test_zero_query_rejected(self):
        cands = EmbeddingMatrix(["a"], [[1.0, 0.0]])
        with pytest.raises(ZeroVector):
            best_match([0.0, 0.0], cands, 0.5)

    def test_matches_exhaustive_oracle(self, kernel_backend):
        rng = np.random.default_rng(1234)
        for _ in range(50):
            dim = int(rng.integers(2, 6))
            n = int(rng.integers(1, 12))
            cands = EmbeddingMatrix([str(i) for i in range(n)],
                                    rng.standard_normal((n, dim)))
            q = rng.standard_normal(dim)
            threshold = float(rng.uniform(-0.5, 0.9))
            got = best_match(q, cands, threshold)
            sims = [cosine_similarity(q, cands.row(j)) for j in range(n)]
            best_j = int(np.argmax(sims))
            if sims[best_j] > threshold:
                assert got is not None and got.candidate_index == best_j
                assert got.score == pytest.approx(sims[best_j], abs=1e-12)
            else:
                assert got is None

    def test_choice_invariant_under_query_rescaling(self, kernel_backend):
        rng = np.random.default_rng(7)
        cands = EmbeddingMatrix([str(i) for i in range(20)], rng.standard_normal((20, 5)))
        q = rng.standard_normal(5)
        base = best_match(q, cands, 0.0)
        for alpha in (1e-3, 0.5, 17.0, 1e4):
            scaled = best_match(alpha * q, cands, 0.0)
            assert scaled.candidate_index == base.candidate_index
