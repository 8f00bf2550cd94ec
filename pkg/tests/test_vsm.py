import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mrfir.corpus import TermDocumentMatrix, Weighting
from mrfir.vsm import QueryVector, RankedList, query_vector, rank_vsm, tfidf_weight


def counts(dense):
    return TermDocumentMatrix(np.asarray(dense, dtype=float), Weighting.RAW_COUNT)


class TestTfidf:
    def test_hand_evaluation(self):
        X = counts([[3, 1, 0, 0], [2, 1, 1, 1]])
        W = tfidf_weight(X)
        assert W.weighting is Weighting.TFIDF
        assert W.matrix[0, 0] == pytest.approx(3 * math.log(2))
        assert W.matrix[0, 0] == pytest.approx(2.0794, abs=1e-4)
        assert W.matrix[0, 1] == pytest.approx(math.log(2))

    def test_term_in_every_document_vanishes(self):
        W = tfidf_weight(counts([[2, 1, 1], [1, 0, 0]]))
        assert W.matrix[0].nnz == 0

    def test_sparsity_never_increases(self, rng):
        C = rng.integers(0, 3, size=(8, 6)) * (rng.random((8, 6)) < 0.4)
        C[:, 0] += np.arange(8) % 2 == 0  # no empty rows
        C[1::2, 1] += 1
        X = counts(C)
        W = tfidf_weight(X)
        assert set(zip(*W.matrix.nonzero())) <= set(zip(*X.matrix.nonzero()))

    def test_log_variant(self):
        W = tfidf_weight(counts([[4, 0], [1, 1]]), tf="log")
        assert W.matrix[0, 0] == pytest.approx((1 + math.log(4)) * math.log(2))

    def test_requires_raw_counts(self):
        W = tfidf_weight(counts([[1, 0], [0, 1]]))
        with pytest.raises(ValueError):
            tfidf_weight(W)

    def test_zero_df_is_an_error(self):
        with pytest.raises(ValueError):
            tfidf_weight(counts([[1, 1], [0, 0]]))


class TestQueryVector:
    def test_weighted(self):
        q = query_vector({0: 2, 2: 1}, 3, idf=np.array([0.5, 1.0, 2.0]))
        np.testing.assert_allclose(q.values, [1.0, 0.0, 2.0])
        assert not q.binary

    def test_binary_ignores_repeats(self):
        q = query_vector({1: 3}, 3, binary=True)
        np.testing.assert_array_equal(q.values, [0, 1, 0])
        assert q.binary

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            QueryVector(np.array([1.0, -1.0]))


class TestRankedList:
    def test_tie_break_by_doc_id(self):
        r = RankedList.from_scores(1, [0.5, 0.9, 0.5, 0.9])
        assert r.entries() == [(1, 0.9), (3, 0.9), (0, 0.5), (2, 0.5)]

    def test_top_n(self):
        r = RankedList.from_scores(1, [0.1, 0.3, 0.2], top_n=2)
        assert [d for d, _ in r] == [1, 2]


class TestRankVsm:
    def test_orthogonal_docs(self):
        X = TermDocumentMatrix(np.eye(2))
        r = rank_vsm(QueryVector(np.array([1.0, 0.0])), X)
        assert r.entries() == [(0, 1.0), (1, 0.0)]

    def test_zero_query(self):
        X = TermDocumentMatrix(np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 3.0]]))
        r = rank_vsm(QueryVector(np.zeros(2)), X)
        assert r.entries() == [(0, 0.0), (1, 0.0), (2, 0.0)]

    def test_brute_force_cosine(self):
        X = np.array([[1.0, 0.0, 2.0], [1.0, 3.0, 0.0], [0.0, 1.0, 1.0]])
        q = np.array([0.0, 1.0, 2.0])
        r = rank_vsm(QueryVector(q), TermDocumentMatrix(X))
        brute = []
        for d in range(3):
            col = X[:, d]
            brute.append(sum(col * q) / math.sqrt(sum(col**2) * sum(q**2)))
        expected = sorted(range(3), key=lambda d: (-brute[d], d))
        assert [d for d, _ in r] == expected
        for d, s in r:
            assert s == pytest.approx(brute[d], abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rank_vsm(QueryVector(np.ones(3)), TermDocumentMatrix(np.eye(2)))

    def test_single_term_orders_by_normalized_weight(self, rng):
        X = rng.random((5, 7)) * (rng.random((5, 7)) < 0.6)
        X[:, X.sum(axis=0) == 0] = 1.0
        q = np.zeros(5)
        q[2] = 1.0
        r = rank_vsm(QueryVector(q), TermDocumentMatrix(X))
        key = X[2] / np.linalg.norm(X, axis=0)
        expected = sorted(range(7), key=lambda d: (-key[d], d))
        assert [d for d, _ in r] == expected

    @settings(max_examples=50)
    @given(arrays(np.float64, 4, elements=st.floats(0, 10)), st.floats(0.01, 100))
    def test_positive_scaling_keeps_order(self, q, alpha):
        X = TermDocumentMatrix(np.array([[1.0, 0.0, 2.0, 1.0], [0.0, 1.0, 1.0, 1.0],
                                         [3.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0]]))
        a = rank_vsm(QueryVector(q), X)
        b = rank_vsm(QueryVector(alpha * q), X)
        np.testing.assert_allclose(a.scores, b.scores, atol=1e-12)
        # identical order up to floating ties
        for (da, sa), (db, sb) in zip(a, b):
            assert da == db or abs(sa - sb) < 1e-12
