"""Latent Semantic Analysis: rank-k factors, query folding, latent ranking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import TermDocumentMatrix
from .linalg import SvdFactors, cosine_rows, svd_truncated
from .vsm import QueryVector, RankedList

__all__ = [
    "DOC_SPACES",
    "LsaIndex",
    "build_lsa_index",
    "fold_query",
    "rank_lsa",
    "doc_similarity",
    "term_similarity",
]

# "V": documents are rows of V_k, queries folded as q^T U_k S_k^-1.
# "VS": documents are rows of V_k S_k, queries projected as q^T U_k.
DOC_SPACES = ("V", "VS")


@dataclass(frozen=True)
class LsaIndex:
    factors: SvdFactors
    doc_space: str = "V"

    def __post_init__(self):
        if self.doc_space not in DOC_SPACES:
            raise ValueError(f"doc_space must be one of {DOC_SPACES}")

    @property
    def k(self) -> int:
        return self.factors.k

    @property
    def n_terms(self) -> int:
        return self.factors.U.shape[0]

    @property
    def n_docs(self) -> int:
        return self.factors.V.shape[0]

    def truncate(self, k: int) -> "LsaIndex":
        return LsaIndex(self.factors.truncate(k), self.doc_space)

    def doc_vectors(self) -> np.ndarray:
        f = self.factors
        return f.V if self.doc_space == "V" else f.V * f.sigma

    def latent_query(self, values: np.ndarray) -> np.ndarray:
        proj = np.asarray(values, dtype=float) @ self.factors.U
        return proj / self.factors.sigma if self.doc_space == "V" else proj


def build_lsa_index(
    X: TermDocumentMatrix, k: int, *, doc_space: str = "V", method: str = "auto", seed: int = 0
) -> LsaIndex:
    """Truncated SVD of the (tf-idf) term-document matrix; may keep fewer than
    ``k`` triplets if the matrix is numerically rank deficient."""
    return LsaIndex(svd_truncated(X.matrix, k, method=method, seed=seed), doc_space)


def fold_query(q: QueryVector, idx: LsaIndex) -> np.ndarray:
    """Project a term-space query into the latent space: ``q^T U_k S_k^-1``."""
    if len(q) != idx.n_terms:
        raise ValueError(f"query length {len(q)} != term count {idx.n_terms}")
    return (q.values @ idx.factors.U) / idx.factors.sigma


def rank_lsa(q: QueryVector, idx: LsaIndex, query_id: int = 0, top_n=None) -> RankedList:
    if len(q) != idx.n_terms:
        raise ValueError(f"query length {len(q)} != term count {idx.n_terms}")
    scores = cosine_rows(idx.doc_vectors(), idx.latent_query(q.values))
    return RankedList.from_scores(query_id, scores, top_n=top_n)


def doc_similarity(idx: LsaIndex) -> np.ndarray:
    """Document inner products ``(V_k S_k)(V_k S_k)^T``."""
    vs = idx.factors.V * idx.factors.sigma
    return vs @ vs.T


def term_similarity(idx: LsaIndex) -> np.ndarray:
    """Term inner products ``(U_k S_k)(U_k S_k)^T``."""
    us = idx.factors.U * idx.factors.sigma
    return us @ us.T
