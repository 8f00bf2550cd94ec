"""tf-idf weighting and cosine ranking in the raw term space."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .corpus import TermDocumentMatrix, Weighting
from .linalg import cosine_rows

__all__ = [
    "TF_SCHEMES",
    "QueryVector",
    "RankedList",
    "inverse_document_frequency",
    "tfidf_weight",
    "query_vector",
    "rank_vsm",
]

TF_SCHEMES = ("raw", "log")


@dataclass(frozen=True)
class QueryVector:
    values: np.ndarray
    binary: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if np.any(v < 0):
            raise ValueError("query vector entries must be non-negative")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]

    def is_zero(self) -> bool:
        return not np.any(self.values)


@dataclass(frozen=True)
class RankedList:
    """Documents ordered by descending score, ties by ascending doc id."""

    query_id: int
    doc_ids: np.ndarray
    scores: np.ndarray

    @classmethod
    def from_scores(cls, query_id, scores, doc_ids=None, top_n=None) -> "RankedList":
        scores = np.asarray(scores, dtype=np.float64).ravel()
        if doc_ids is None:
            doc_ids = np.arange(scores.shape[0])
        doc_ids = np.asarray(doc_ids).ravel()
        order = np.lexsort((doc_ids, -scores))
        if top_n is not None:
            order = order[:top_n]
        return cls(query_id, doc_ids[order], scores[order])

    def __len__(self) -> int:
        return self.doc_ids.shape[0]

    def __iter__(self):
        return iter(self.entries())

    def entries(self) -> list[tuple[int, float]]:
        return [(int(d), float(s)) for d, s in zip(self.doc_ids, self.scores)]

    def top(self, n: int) -> "RankedList":
        return RankedList(self.query_id, self.doc_ids[:n], self.scores[:n])


def inverse_document_frequency(X: TermDocumentMatrix) -> np.ndarray:
    """``ln(m / df)`` per term, ``df`` counted from the stored entries."""
    df = X.document_frequency()
    if np.any(df == 0):
        missing = np.flatnonzero(df == 0)[:10].tolist()
        raise ValueError(f"vocabulary terms with zero document frequency: {missing}")
    return np.log(X.n_docs / df)


def _tf(data: np.ndarray, scheme: str) -> np.ndarray:
    if scheme == "raw":
        return data
    if scheme == "log":
        return 1.0 + np.log(data)
    raise ValueError(f"unknown tf scheme {scheme!r}; expected one of {TF_SCHEMES}")


def tfidf_weight(X: TermDocumentMatrix, tf: str = "raw") -> TermDocumentMatrix:
    """Weight raw counts by ``tf(t, d) * ln(m / df(t))``.

    Terms present in every document get weight zero and drop out.
    """
    if X.weighting is not Weighting.RAW_COUNT:
        raise ValueError("tf-idf weighting expects a RAW_COUNT matrix")
    idf = inverse_document_frequency(X)
    csr = X.matrix.tocsr()
    data = _tf(csr.data.copy(), tf)
    counts = np.diff(csr.indptr)
    data *= np.repeat(idf, counts)
    weighted = sp.csr_matrix((data, csr.indices, csr.indptr), shape=csr.shape)
    return TermDocumentMatrix(weighted.tocsc(), Weighting.TFIDF)


def query_vector(
    counts: Mapping[int, int] | np.ndarray,
    n_terms: int,
    idf: np.ndarray | None = None,
    *,
    binary: bool = False,
    tf: str = "raw",
) -> QueryVector:
    """Build a term-space query from term-index counts.

    ``binary=True`` yields 0/1 indicators; otherwise counts pass through the
    ``tf`` scheme and are multiplied by ``idf`` when one is given.
    """
    v = np.zeros(n_terms)
    if isinstance(counts, Mapping):
        for t, c in counts.items():
            v[t] = c
    else:
        v[:] = np.asarray(counts, dtype=float).ravel()
    if binary:
        return QueryVector((v > 0).astype(float), binary=True)
    nz = v > 0
    v[nz] = _tf(v[nz], tf)
    if idf is not None:
        v = v * idf
    return QueryVector(v, binary=False)


def rank_vsm(q: QueryVector, X: TermDocumentMatrix, query_id: int = 0, top_n=None) -> RankedList:
    """Rank every document by cosine between ``q`` and its column of ``X``."""
    if len(q) != X.n_terms:
        raise ValueError(f"query length {len(q)} != term count {X.n_terms}")
    scores = cosine_rows(X.matrix.T.tocsr(), q.values)
    return RankedList.from_scores(query_id, scores, top_n=top_n)
