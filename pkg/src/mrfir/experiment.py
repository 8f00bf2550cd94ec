"""Batch scoring, evaluation runs and k-sweeps over a loaded test collection."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .classic4 import TestCollection
from .corpus import (
    Collection,
    QrelSet,
    RawDocument,
    RawQuery,
    TermDocumentMatrix,
    Vocabulary,
    Weighting,
    build_count_matrix,
    build_vocabulary,
)
from .evaluation import (
    PrCurve,
    SweepResult,
    average_curves,
    average_precision,
    mean_average_precision,
    pr_curve,
)
from .linalg import SvdFactors, svd_truncated
from .lsa import LsaIndex
from .mrf import MrfParameters, doc_scores, make_learning_input
from .snapshot import load_snapshot, save_snapshot
from .vsm import RankedList, inverse_document_frequency, tfidf_weight

__all__ = [
    "MODELS",
    "RunResult",
    "Experiment",
    "sweep_k",
    "save_corpus",
    "load_corpus",
]

log = logging.getLogger(__name__)

MODELS = ("vsm", "lsa", "mrf")


def _normalize_columns(M: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(M, axis=0)
    norms[norms == 0] = 1.0
    return M / norms


@dataclass
class RunResult:
    model: str
    collection: str
    k: int | None
    ap: dict = field(default_factory=dict)  # query id -> AP, ascending ids
    skipped: list = field(default_factory=list)
    curve: PrCurve | None = None

    @property
    def map(self) -> float:
        return mean_average_precision([self.ap[q] for q in sorted(self.ap)])

    def summary(self) -> dict:
        return {
            "model": self.model,
            "collection": self.collection,
            "k": self.k,
            "map": self.map,
            "queries": len(self.ap),
            "skipped_queries": len(self.skipped),
        }


class Experiment:
    """Vocabulary, matrices and query vectors for one combined corpus."""

    def __init__(
        self,
        collection: TestCollection,
        vocab: Vocabulary,
        counts: TermDocumentMatrix,
        *,
        tf: str = "raw",
    ):
        if counts.shape != (len(vocab), len(collection.documents)):
            raise ValueError("count matrix does not match vocabulary and corpus sizes")
        self.collection = collection
        self.vocab = vocab
        self.counts = counts
        self.tf = tf
        self._factor_cache: dict = {}

    @classmethod
    def build(cls, collection: TestCollection, min_len: int = 3, max_df_frac: float = 0.95, tf: str = "raw"):
        vocab = build_vocabulary(collection.documents, min_len, max_df_frac)
        counts = build_count_matrix(collection.documents, vocab)
        return cls(collection, vocab, counts, tf=tf)

    @property
    def n_docs(self) -> int:
        return self.counts.n_docs

    @cached_property
    def tfidf(self) -> TermDocumentMatrix:
        return tfidf_weight(self.counts, self.tf)

    @cached_property
    def idf(self) -> np.ndarray:
        return inverse_document_frequency(self.counts)

    def weighted(self, weighting: str) -> TermDocumentMatrix:
        if weighting in ("tfidf", Weighting.TFIDF):
            return self.tfidf
        if weighting in ("count", Weighting.RAW_COUNT):
            return self.counts
        raise ValueError(f"unknown weighting {weighting!r}")

    # -- queries ---------------------------------------------------------

    def encode_queries(self, texts) -> sp.csc_matrix:
        """Raw term counts for each text, terms x queries."""
        rows, cols, vals = [], [], []
        for j, text in enumerate(texts):
            for t, c in self.vocab.encode(text).items():
                rows.append(t)
                cols.append(j)
                vals.append(c)
        return sp.csc_matrix(
            (np.asarray(vals, dtype=float), (rows, cols)), shape=(len(self.vocab), len(texts))
        )

    def query_matrix(self, counts: sp.spmatrix, scheme: str) -> np.ndarray:
        """Dense query vectors (terms x queries) for ``tfidf``, ``count`` or ``binary``."""
        Q = counts.toarray()
        if scheme == "binary":
            return (Q > 0).astype(float)
        if scheme == "count":
            return Q
        if scheme == "tfidf":
            if self.tf == "log":
                Q = np.where(Q > 0, 1.0 + np.log(np.where(Q > 0, Q, 1.0)), 0.0)
            return Q * self.idf[:, None]
        raise ValueError(f"unknown query scheme {scheme!r}")

    def queries_of(self, collection) -> list[RawQuery]:
        return list(self.collection.queries.get(Collection(collection), ()))

    # -- scoring -----------------------------------------------------------

    def vsm_scores(self, Q: np.ndarray) -> np.ndarray:
        """Cosine of each tf-idf query column against each document, m x q."""
        X = self.tfidf.matrix
        norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=0)).ravel())
        norms[norms == 0] = 1.0
        Xn = X @ sp.diags(1.0 / norms)
        return np.asarray(Xn.T @ _normalize_columns(Q))

    @staticmethod
    def lsa_scores(idx: LsaIndex, Q: np.ndarray) -> np.ndarray:
        docs = idx.doc_vectors().T  # k x m
        latent = idx.latent_query(Q.T).T  # k x q
        return _normalize_columns(docs).T @ _normalize_columns(latent)

    @staticmethod
    def mrf_scores(params: MrfParameters, Q: np.ndarray) -> np.ndarray:
        return doc_scores(params, Q)

    # -- factorizations ----------------------------------------------------

    def factors(self, model: str, k: int, *, weighting: str = "tfidf", method: str = "auto", seed: int = 0) -> SvdFactors:
        """Truncated SVD for LSA (of X) or MRF (of T_hat), reused across
        smaller ``k`` once computed."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        key = (model, weighting, method, seed)
        cached = self._factor_cache.get(key)
        if cached is not None and (cached[0] >= k):
            return cached[1].truncate(k)
        X = self.weighted(weighting)
        if model == "lsa":
            A = X.matrix
        elif model == "mrf":
            A = make_learning_input(X).T_hat
        else:
            raise ValueError(f"no factorization for model {model!r}")
        t0 = time.perf_counter()
        f = svd_truncated(A, k, method=method, seed=seed)
        log.info("%s SVD k=%d of %s in %.1fs", model, k, A.shape, time.perf_counter() - t0)
        self._factor_cache[key] = (k, f)
        return f

    def lsa_index(self, k: int, *, doc_space: str = "V", method: str = "auto", seed: int = 0) -> LsaIndex:
        return LsaIndex(self.factors("lsa", k, method=method, seed=seed), doc_space)

    def mrf_parameters(self, k: int, *, weighting: str = "tfidf", method: str = "auto", seed: int = 0) -> MrfParameters:
        return MrfParameters(factors=self.factors("mrf", k, weighting=weighting, method=method, seed=seed))

    # -- evaluation --------------------------------------------------------

    def evaluate_scores(self, model: str, collection, scores: np.ndarray, query_ids, k=None) -> RunResult:
        """AP per query (ascending id) and averaged 11-point curve."""
        coll = Collection(collection)
        relevant = self.collection.relevant(coll)
        result = RunResult(model, coll.value, k)
        curves = []
        order = np.argsort(query_ids, kind="stable")
        for j in order:
            qid = query_ids[j]
            rel = relevant.get(qid, set())
            ranked = RankedList.from_scores(qid, scores[:, j])
            ap = average_precision(ranked, rel)
            if ap is None:
                result.skipped.append(qid)
                continue
            result.ap[qid] = ap
            curves.append(pr_curve(ranked, rel))
        if curves:
            result.curve = average_curves(curves)
        return result

    def run(self, model: str, collection, k: int | None = None, *, weighting: str = "tfidf",
            doc_space: str = "V", method: str = "auto", seed: int = 0) -> RunResult:
        qs = self.queries_of(collection)
        if not qs:
            raise ValueError(f"collection {Collection(collection).value} has no queries")
        counts = self.encode_queries([q.text for q in qs])
        ids = [q.id for q in qs]
        if model == "vsm":
            scores = self.vsm_scores(self.query_matrix(counts, "tfidf"))
            k = None
        elif model == "lsa":
            idx = self.lsa_index(k, doc_space=doc_space, method=method, seed=seed)
            scores = self.lsa_scores(idx, self.query_matrix(counts, "tfidf"))
        elif model == "mrf":
            params = self.mrf_parameters(k, weighting=weighting, method=method, seed=seed)
            scores = self.mrf_scores(params, self.query_matrix(counts, "binary"))
        else:
            raise ValueError(f"unknown model {model!r}")
        return self.evaluate_scores(model, collection, scores, ids, k)


def sweep_k(
    exp: Experiment,
    model: str,
    collection,
    k_values,
    *,
    weighting: str = "tfidf",
    doc_space: str = "V",
    method: str = "auto",
    seed: int = 0,
) -> SweepResult:
    """MAP for each ``k``; one factorization at the largest ``k`` serves all."""
    ks = sorted(set(int(k) for k in k_values))
    coll = Collection(collection)
    result = SweepResult(model, coll.value)
    try:
        exp.factors(model, ks[-1], weighting=weighting, method=method, seed=seed)
    except Exception as exc:  # recorded per k below
        log.warning("factorization at k=%d failed: %s", ks[-1], exc)
    for k in ks:
        try:
            run = exp.run(model, coll, k, weighting=weighting, doc_space=doc_space, method=method, seed=seed)
            result.rows.append((k, run.map))
        except Exception as exc:
            result.failures[k] = f"{type(exc).__name__}: {exc}"
    return result


# -- persistence ---------------------------------------------------------

_CORPUS_KIND = "corpus"


def save_corpus(path, exp: Experiment) -> None:
    tc = exp.collection
    X = exp.counts.matrix
    queries = {c.value: [[q.id, q.text] for q in qs] for c, qs in tc.queries.items()}
    qrels = {c.value: sorted([q, d] for q, d in rel.entries) for c, rel in tc.qrels.items()}
    header = {
        "n_terms": X.shape[0],
        "n_docs": X.shape[1],
        "weighting": exp.counts.weighting.value,
        "vocabulary_digest": exp.vocab.digest(),
        "min_term_len": exp.vocab.min_len,
        "max_df_frac": exp.vocab.max_df_frac,
        "tf": exp.tf,
        "terms": list(exp.vocab.terms),
        "documents": [[d.collection.value, d.id, d.text] for d in tc.documents],
        "queries": queries,
        "qrels": qrels,
        "dropped_qrels": {c.value: n for c, n in tc.dropped_qrels.items()},
        "report": tc.report(),
    }
    arrays = {
        "df": exp.vocab.df,
        "data": X.data,
        "indices": X.indices.astype(np.int64),
        "indptr": X.indptr.astype(np.int64),
    }
    save_snapshot(path, _CORPUS_KIND, header, arrays)


def load_corpus(path) -> Experiment:
    header, arrays = load_snapshot(path, _CORPUS_KIND)
    docs = [RawDocument(i, text, Collection(c)) for c, i, text in header["documents"]]
    queries = {
        Collection(c): [RawQuery(i, text, Collection(c)) for i, text in qs]
        for c, qs in header["queries"].items()
    }
    qrels = {Collection(c): QrelSet(frozenset((q, d) for q, d in rel)) for c, rel in header["qrels"].items()}
    dropped = {Collection(c): n for c, n in header.get("dropped_qrels", {}).items()}
    tc = TestCollection(docs, queries, qrels, dropped)
    vocab = Vocabulary(tuple(header["terms"]), arrays["df"], header["min_term_len"], header["max_df_frac"])
    if vocab.digest() != header["vocabulary_digest"]:
        raise ValueError(f"{path}: vocabulary digest mismatch")
    X = sp.csc_matrix(
        (arrays["data"], arrays["indices"], arrays["indptr"]),
        shape=(header["n_terms"], header["n_docs"]),
    )
    counts = TermDocumentMatrix(X, Weighting(header["weighting"]))
    return Experiment(tc, vocab, counts, tf=header.get("tf", "raw"))
