import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mrfir.linalg import (
    SvdFactors,
    cosine,
    cosine_rows,
    frobenius_norm,
    pseudoinverse_k,
    reconstruct,
    svd_truncated,
)


def _orthonormality_error(M):
    return np.linalg.norm(M.T @ M - np.eye(M.shape[1]))


class TestSvdTruncated:
    def test_diagonal_full(self):
        f = svd_truncated(np.diag([3.0, 2.0]), 2)
        np.testing.assert_allclose(f.sigma, [3.0, 2.0])
        np.testing.assert_allclose(np.abs(f.U), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(np.abs(f.V), np.eye(2), atol=1e-12)

    def test_diagonal_dominant_triplet(self):
        f = svd_truncated(np.diag([3.0, 2.0]), 1)
        assert f.k == 1
        np.testing.assert_allclose(f.sigma, [3.0])
        np.testing.assert_allclose(reconstruct(f), [[3.0, 0.0], [0.0, 0.0]], atol=1e-12)

    def test_eckart_young_random_search(self, rng):
        A = rng.standard_normal((6, 5))
        best = np.linalg.norm(A - reconstruct(svd_truncated(A, 3)))
        for _ in range(1000):
            B = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 5))
            assert best <= np.linalg.norm(A - B)

    def test_eckart_young_beats_perturbed_optimum(self, rng):
        A = rng.standard_normal((6, 5))
        f = svd_truncated(A, 3)
        best = np.linalg.norm(A - reconstruct(f))
        for _ in range(200):
            U = f.U + 1e-3 * rng.standard_normal(f.U.shape)
            B = (U * f.sigma) @ f.V.T
            assert best <= np.linalg.norm(A - B) + 1e-15

    def test_error_matches_tail_singular_values(self, rng):
        A = rng.standard_normal((7, 6))
        full = np.linalg.svd(A, compute_uv=False)
        for k in range(1, 7):
            err = np.linalg.norm(A - reconstruct(svd_truncated(A, k)))
            assert err == pytest.approx(math.sqrt(np.sum(full[k:] ** 2)), abs=1e-10)

    def test_k_clipped_to_rank(self):
        A = np.outer([1.0, 2.0, 3.0], [1.0, -1.0])  # rank 1
        f = svd_truncated(A, 2)
        assert f.k == 1
        np.testing.assert_allclose(reconstruct(f), A, atol=1e-12)

    def test_zero_matrix_has_empty_factors(self):
        f = svd_truncated(np.zeros((3, 2)), 2)
        assert f.k == 0
        np.testing.assert_array_equal(reconstruct(f), np.zeros((3, 2)))

    @pytest.mark.parametrize("k", [0, -1])
    def test_bad_k(self, k):
        with pytest.raises(ValueError):
            svd_truncated(np.eye(2), k)

    @pytest.mark.parametrize("bad", [np.nan, np.inf])
    def test_non_finite(self, bad):
        A = np.eye(3)
        A[1, 2] = bad
        with pytest.raises(ValueError):
            svd_truncated(A, 1)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            svd_truncated(np.eye(2), 1, method="qr")

    def test_sorted_positive_orthonormal(self, rng):
        for shape in [(8, 6), (6, 8), (20, 3)]:
            f = svd_truncated(rng.standard_normal(shape), 5)
            assert np.all(np.diff(f.sigma) <= 0)
            assert np.all(f.sigma > 0)
            assert _orthonormality_error(f.U) < 1e-8
            assert _orthonormality_error(f.V) < 1e-8

    def test_sign_convention(self, rng):
        f = svd_truncated(rng.standard_normal((9, 7)), 7)
        for j in range(f.k):
            col = f.U[:, j]
            assert col[np.argmax(np.abs(col))] >= 0

    def test_sparse_input(self, rng):
        A = sp.random(30, 20, density=0.2, random_state=3, format="csc")
        f = svd_truncated(A, 20)
        np.testing.assert_allclose(reconstruct(f), A.toarray(), atol=1e-10)

    def test_iterative_agrees_with_dense(self, rng):
        A = sp.random(200, 150, density=0.05, random_state=7, format="csr")
        d = svd_truncated(A, 10, method="dense")
        i = svd_truncated(A, 10, method="iterative", seed=1)
        np.testing.assert_allclose(i.sigma, d.sigma, rtol=1e-8)
        # same subspace: projectors agree
        np.testing.assert_allclose(i.U @ i.U.T, d.U @ d.U.T, atol=1e-6)
        np.testing.assert_allclose(reconstruct(i), reconstruct(d), atol=1e-8)

    def test_iterative_is_deterministic_for_seed(self):
        A = sp.random(120, 100, density=0.05, random_state=11, format="csr")
        a = svd_truncated(A, 5, method="iterative", seed=4)
        b = svd_truncated(A, 5, method="iterative", seed=4)
        np.testing.assert_array_equal(a.U, b.U)
        np.testing.assert_array_equal(a.sigma, b.sigma)

    def test_truncate_matches_direct(self, rng):
        A = rng.standard_normal((10, 8))
        np.testing.assert_allclose(
            reconstruct(svd_truncated(A, 8).truncate(3)), reconstruct(svd_truncated(A, 3)), atol=1e-10
        )


class TestReconstruct:
    def test_full_rank_identity(self, rng):
        A = rng.standard_normal((5, 4))
        assert np.linalg.norm(A - reconstruct(svd_truncated(A, 4))) < 1e-8

    def test_empty_factors(self):
        f = SvdFactors(np.zeros((3, 0)), np.zeros(0), np.zeros((4, 0)))
        np.testing.assert_array_equal(reconstruct(f), np.zeros((3, 4)))

    def test_error_non_increasing_in_k(self, rng):
        A = rng.standard_normal((8, 6))
        errors = [np.linalg.norm(A - reconstruct(svd_truncated(A, k))) for k in range(1, 7)]
        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


def _penrose_residuals(A, P):
    return (
        np.linalg.norm(A @ P @ A - A),
        np.linalg.norm(P @ A @ P - P),
        np.linalg.norm((A @ P).T - A @ P),
        np.linalg.norm((P @ A).T - P @ A),
    )


class TestPseudoinverse:
    def test_diagonal(self):
        np.testing.assert_allclose(pseudoinverse_k(np.diag([2.0, 0.0]), 2), [[0.5, 0.0], [0.0, 0.0]])

    def test_invertible(self, rng):
        A = rng.standard_normal((4, 4)) + 4 * np.eye(4)
        np.testing.assert_allclose(pseudoinverse_k(A, 4), np.linalg.inv(A), atol=1e-8)

    def test_penrose_conditions_tall(self):
        A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        assert max(_penrose_residuals(A, pseudoinverse_k(A, 2))) < 1e-8

    def test_matches_numpy_pinv(self, rng):
        A = rng.standard_normal((7, 5))
        np.testing.assert_allclose(pseudoinverse_k(A, 5), np.linalg.pinv(A), atol=1e-10)

    def test_rank_k_shape_and_rank(self, rng):
        A = rng.standard_normal((7, 5))
        P = pseudoinverse_k(A, 2)
        assert P.shape == (5, 7)
        assert np.linalg.matrix_rank(P) == 2

    def test_bad_k(self):
        with pytest.raises(ValueError):
            pseudoinverse_k(np.eye(2), 0)


class TestCosine:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ((1, 0), (0, 1), 0.0),
            ((1, 1), (1, 0), math.sqrt(2) / 2),
            ((0, 0), (1, 2), 0.0),
            ((2, 0), (-3, 0), -1.0),
        ],
    )
    def test_examples(self, a, b, expected):
        assert cosine(a, b) == pytest.approx(expected, abs=1e-7)

    @given(
        arrays(np.float64, 5, elements=st.floats(-100, 100)),
        arrays(np.float64, 5, elements=st.floats(-100, 100)),
        st.floats(1e-3, 1e3),
    )
    def test_symmetric_and_scale_invariant(self, a, b, alpha):
        c = cosine(a, b)
        assert -1.0 <= c <= 1.0
        assert c == pytest.approx(cosine(b, a), abs=1e-12)
        if np.linalg.norm(a) > 1e-6 and np.linalg.norm(b) > 1e-6:
            assert cosine(alpha * a, b) == pytest.approx(c, abs=1e-9)

    def test_rows_dense_and_sparse(self, rng):
        M = rng.random((6, 4))
        M[2] = 0
        q = rng.random(4)
        expected = [cosine(row, q) for row in M]
        np.testing.assert_allclose(cosine_rows(M, q), expected, atol=1e-12)
        np.testing.assert_allclose(cosine_rows(sp.csr_matrix(M), q), expected, atol=1e-12)


class TestFrobenius:
    def test_examples(self):
        assert frobenius_norm(np.array([[3.0, 4.0]])) == 5.0
        assert frobenius_norm(np.zeros((3, 3))) == 0.0

    def test_elementwise_oracle(self, rng):
        A = rng.standard_normal((4, 4))
        direct = math.sqrt(sum(A[i, j] ** 2 for i in range(4) for j in range(4)))
        assert frobenius_norm(A) == pytest.approx(direct, abs=1e-12)
        assert frobenius_norm(sp.csr_matrix(A)) == pytest.approx(direct, abs=1e-12)

    @settings(max_examples=30)
    @given(arrays(np.float64, (3, 2), elements=st.floats(-1e3, 1e3)))
    def test_non_negative(self, A):
        assert frobenius_norm(A) >= 0
