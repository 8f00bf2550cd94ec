"""Numerical core: truncated SVD, rank-k pseudoinverse, cosine, Frobenius norm.

Matrices may be dense ``numpy.ndarray`` or any ``scipy.sparse`` matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.linalg import svds

__all__ = [
    "DROP_TOL",
    "SvdFactors",
    "svd_truncated",
    "reconstruct",
    "pseudoinverse_k",
    "cosine",
    "cosine_rows",
    "frobenius_norm",
]

# Singular values below DROP_TOL * sigma_max are treated as zero.
DROP_TOL = 1e-10

# Above this smaller dimension an iterative solver is used when k is small.
_DENSE_LIMIT = 1500


@dataclass(frozen=True)
class SvdFactors:
    """Rank-``k`` singular triplets, ``A ~= U @ diag(sigma) @ V.T``."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def k(self) -> int:
        return int(self.sigma.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.U.shape[0], self.V.shape[0])

    def truncate(self, k: int) -> "SvdFactors":
        """Keep the leading ``k`` triplets (no-op when ``k >= self.k``)."""
        if k < 0:
            raise ValueError(f"k must be non-negative, got {k}")
        if k >= self.k:
            return self
        return SvdFactors(self.U[:, :k], self.sigma[:k], self.V[:, :k])


def _check_matrix(A) -> None:
    data = A.data if sp.issparse(A) else np.asarray(A)
    if not np.all(np.isfinite(data)):
        raise ValueError("matrix has non-finite entries")


def _fix_signs(U: np.ndarray, V: np.ndarray) -> None:
    # largest-magnitude entry of each U column made non-negative, in place
    if U.shape[1] == 0:
        return
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    U *= signs
    V *= signs


def _dense_svd(A, k: int):
    dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    try:
        u, s, vt = scipy.linalg.svd(
            dense, full_matrices=False, check_finite=False, lapack_driver="gesdd"
        )
    except np.linalg.LinAlgError:
        u, s, vt = scipy.linalg.svd(
            dense, full_matrices=False, check_finite=False, lapack_driver="gesvd"
        )
    return u[:, :k], s[:k], vt[:k].T


def _iterative_svd(A, k: int, seed: int):
    A = sp.csr_matrix(A, dtype=float) if sp.issparse(A) else np.asarray(A, dtype=float)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(min(A.shape))
    u, s, vt = svds(A, k=k, v0=v0, solver="arpack")
    order = np.argsort(s)[::-1]
    return u[:, order], s[order], vt[order].T


def svd_truncated(A, k: int, *, method: str = "auto", seed: int = 0) -> SvdFactors:
    """Leading ``k`` singular triplets of ``A``.

    Triplets whose singular value falls below ``DROP_TOL * sigma_max`` are
    discarded, so the returned rank may be smaller than ``k``. ``method`` is
    ``"dense"`` (LAPACK), ``"iterative"`` (ARPACK Lanczos, seeded start
    vector) or ``"auto"``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _check_matrix(A)
    rows, cols = A.shape
    small = min(rows, cols)
    if small == 0:
        return SvdFactors(np.zeros((rows, 0)), np.zeros(0), np.zeros((cols, 0)))
    k = min(k, small)

    if method == "auto":
        iterative = small > _DENSE_LIMIT and k < small // 10
        method = "iterative" if iterative else "dense"
    if method == "dense":
        U, s, V = _dense_svd(A, k)
    elif method == "iterative":
        if k >= small:
            U, s, V = _dense_svd(A, k)
        else:
            U, s, V = _iterative_svd(A, k, seed)
    else:
        raise ValueError(f"unknown SVD method {method!r}")

    if s.size and s[0] > 0:
        keep = int(np.count_nonzero(s > DROP_TOL * s[0]))
    else:
        keep = 0
    U = np.ascontiguousarray(U[:, :keep])
    V = np.ascontiguousarray(V[:, :keep])
    _fix_signs(U, V)
    return SvdFactors(U, np.array(s[:keep]), V)


def reconstruct(f: SvdFactors) -> np.ndarray:
    """Dense ``U diag(sigma) V^T``; the zero matrix for empty factors."""
    return (f.U * f.sigma) @ f.V.T


def pseudoinverse_k(A, k: int, *, method: str = "auto", seed: int = 0) -> np.ndarray:
    """Rank-``k`` Moore-Penrose pseudoinverse ``V_k diag(1/sigma_k) U_k^T``."""
    f = svd_truncated(A, k, method=method, seed=seed)
    return (f.V / f.sigma) @ f.U.T


def cosine(a, b) -> float:
    """Cosine of the angle between ``a`` and ``b``; 0 if either is a zero vector."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def cosine_rows(M, q) -> np.ndarray:
    """Cosine of ``q`` against every row of ``M`` (dense or sparse)."""
    q = np.asarray(q, dtype=float).ravel()
    qn = np.linalg.norm(q)
    if sp.issparse(M):
        dots = np.asarray(M @ q).ravel()
        norms = np.sqrt(np.asarray(M.multiply(M).sum(axis=1)).ravel())
    else:
        M = np.asarray(M, dtype=float)
        dots = M @ q
        norms = np.linalg.norm(M, axis=1)
    denom = norms * qn
    out = np.zeros(dots.shape[0])
    ok = denom > 0
    out[ok] = dots[ok] / denom[ok]
    return np.clip(out, -1.0, 1.0)


def frobenius_norm(A) -> float:
    if sp.issparse(A):
        return float(spla.norm(A, "fro"))
    return float(np.linalg.norm(np.asarray(A, dtype=float)))
