"""Term-document Markov random field.

Binary term variables ``t`` (length n) and document variables ``d`` (length
m) interact through single-node cliques (biases ``b`` for terms, ``g`` for
documents) and term-document pair cliques (weights ``W``). The energy

    V(t, d) = b.t + g.d + sum_ij W[j, i] t_i d_j

acts as a log-compatibility, ``P(t, d) = exp(V) / Z``. ``W`` is stored
documents x terms, so row ``j`` feeds document ``j``.

Parameters ``[W g]`` are learned as the rank-k pseudoinverse of the
observation matrix with an always-on row appended, the rank-constrained
least-squares solution of ``I ~= [W g] T_hat``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .corpus import TermDocumentMatrix
from .linalg import SvdFactors, frobenius_norm, svd_truncated
from .vsm import QueryVector, RankedList

__all__ = [
    "MrfConfiguration",
    "MrfParameters",
    "LearningInput",
    "energy",
    "log_joint_ratio",
    "joint_unnormalized",
    "local_doc_probability",
    "gibbs_oracle",
    "make_learning_input",
    "learn_parameters",
    "evaluate_objective",
    "doc_scores",
    "rank_mrf",
]


def _binary(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64).ravel()
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must be a 0/1 vector")
    return arr


@dataclass(frozen=True)
class MrfConfiguration:
    T: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "T", _binary(self.T, "T"))
        object.__setattr__(self, "D", _binary(self.D, "D"))

    def with_doc(self, i: int, value: int) -> "MrfConfiguration":
        D = self.D.copy()
        D[i] = value
        return MrfConfiguration(self.T, D)


class MrfParameters:
    """Term biases ``b``, document biases ``g`` and weights ``W`` (m x n).

    Built either from dense arrays or, after learning, from the truncated SVD
    of ``T_hat``; in the latter case ``[W g] = V diag(1/sigma) U^T`` is kept
    factored and ``W`` is only materialized on access.
    """

    def __init__(self, W=None, g=None, b=None, *, factors: SvdFactors | None = None):
        if factors is None:
            if W is None or g is None:
                raise ValueError("need W and g, or factors")
            W = np.asarray(W, dtype=np.float64)
            g = np.asarray(g, dtype=np.float64).ravel()
            if W.ndim != 2 or W.shape[0] != g.shape[0]:
                raise ValueError(f"W {W.shape} and g {g.shape} disagree on document count")
            n_docs, n_terms = W.shape
        else:
            n_terms = factors.U.shape[0] - 1
            n_docs = factors.V.shape[0]
        if b is None:
            b = np.zeros(n_terms)
        b = np.asarray(b, dtype=np.float64).ravel()
        if b.shape != (n_terms,):
            raise ValueError(f"b has length {b.shape[0]}, expected {n_terms}")
        for name, arr in (("W", W), ("g", g), ("b", b)):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        self._W = W
        self._g = g
        self.b = b
        self.factors = factors
        self.n_terms = n_terms
        self.n_docs = n_docs

    @property
    def k(self) -> int | None:
        return None if self.factors is None else self.factors.k

    @property
    def g(self) -> np.ndarray:
        if self._g is None:
            f = self.factors
            self._g = f.V @ (f.U[-1] / f.sigma)
        return self._g

    @property
    def W(self) -> np.ndarray:
        if self._W is None:
            f = self.factors
            self._W = (f.V / f.sigma) @ f.U[:-1].T
        return self._W

    def stacked(self) -> np.ndarray:
        """Dense ``[W g]``, shape m x (n + 1)."""
        return np.hstack([self.W, self.g[:, None]])

    def truncate(self, k: int) -> "MrfParameters":
        if self.factors is None:
            raise ValueError("only learned (factored) parameters can be truncated")
        return MrfParameters(b=self.b, factors=self.factors.truncate(k))


def energy(cfg: MrfConfiguration, p: MrfParameters) -> float:
    """Sum of all clique potentials for a full configuration."""
    if cfg.T.shape[0] != p.n_terms or cfg.D.shape[0] != p.n_docs:
        raise ValueError(
            f"configuration ({cfg.T.shape[0]} terms, {cfg.D.shape[0]} docs) does not "
            f"match parameters ({p.n_terms} terms, {p.n_docs} docs)"
        )
    return float(p.b @ cfg.T + p.g @ cfg.D + cfg.D @ (p.W @ cfg.T))


def joint_unnormalized(cfg: MrfConfiguration, p: MrfParameters) -> float:
    """``exp(V)``; the partition function is never formed."""
    return float(np.exp(energy(cfg, p)))


def log_joint_ratio(c1: MrfConfiguration, c2: MrfConfiguration, p: MrfParameters) -> float:
    """``log(P(c1) / P(c2))``."""
    return energy(c1, p) - energy(c2, p)


def local_doc_probability(i: int, T, p: MrfParameters) -> float:
    """``P(d_i = 1 | everything else) = sigmoid(g_i + W[i] . T)``."""
    T = _binary(T, "T")
    if T.shape[0] != p.n_terms:
        raise ValueError(f"T has length {T.shape[0]}, expected {p.n_terms}")
    if p.factors is None:
        act = p.g[i] + p.W[i] @ T
    else:
        f = p.factors
        act = f.V[i] @ ((f.U[:-1].T @ T + f.U[-1]) / f.sigma)
    return float(expit(act))


def gibbs_oracle(i: int, cfg: MrfConfiguration, p: MrfParameters) -> float:
    """Conditional of ``d_i = 1`` by direct evaluation of the two joints.

    Every variable except ``d_i`` is clamped to its value in ``cfg``.
    """
    e1 = energy(cfg.with_doc(i, 1), p)
    e0 = energy(cfg.with_doc(i, 0), p)
    shift = max(e0, e1)
    j1 = np.exp(e1 - shift)
    j0 = np.exp(e0 - shift)
    return float(j1 / (j1 + j0))


@dataclass(frozen=True)
class LearningInput:
    """Observation matrix with an always-on last row, (n + 1) x m_obs."""

    T_hat: sp.csc_matrix

    def __post_init__(self):
        T = sp.csc_matrix(self.T_hat, dtype=np.float64)
        if T.shape[0] < 1:
            raise ValueError("T_hat needs at least the always-on row")
        last = T[-1].toarray().ravel()
        if not np.all(last == 1.0):
            raise ValueError("last row of T_hat must be all ones")
        if np.any(T.data < 0) or not np.all(np.isfinite(T.data)):
            raise ValueError("T_hat entries must be finite and non-negative")
        object.__setattr__(self, "T_hat", T)

    @property
    def n_terms(self) -> int:
        return self.T_hat.shape[0] - 1

    @property
    def n_obs(self) -> int:
        return self.T_hat.shape[1]


def make_learning_input(X) -> LearningInput:
    """Append the always-on row to a terms x observations matrix."""
    M = X.matrix if isinstance(X, TermDocumentMatrix) else X
    M = sp.csc_matrix(M, dtype=np.float64)
    ones = sp.csc_matrix(np.ones((1, M.shape[1])))
    return LearningInput(sp.vstack([M, ones], format="csc"))


def learn_parameters(
    data: LearningInput, k: int, *, method: str = "auto", seed: int = 0
) -> MrfParameters:
    """``[W g] = pinv_k(T_hat)``; ``b`` is fixed at zero."""
    factors = svd_truncated(data.T_hat, k, method=method, seed=seed)
    return MrfParameters(factors=factors)


def evaluate_objective(p: MrfParameters, data: LearningInput) -> float:
    """``|| I - [W g] T_hat ||_F`` with ``I`` of size m_obs."""
    if p.n_terms != data.n_terms or p.n_docs != data.n_obs:
        raise ValueError("parameters and learning input disagree on dimensions")
    m = data.n_obs
    f = p.factors
    if f is not None:
        # V has orthonormal columns, so with C = diag(1/sigma) U^T T_hat:
        # ||I - V C||^2 = m - 2 tr(C V) + ||C||^2
        C = (data.T_hat.T @ f.U).T / f.sigma[:, None]
        sq = m - 2.0 * np.sum(C * f.V.T) + np.sum(C * C)
        return float(np.sqrt(max(sq, 0.0)))
    residual = np.eye(m) - np.asarray(data.T_hat.T @ p.stacked().T).T
    return frobenius_norm(residual)


def doc_scores(p: MrfParameters, T) -> np.ndarray:
    """Activations ``g + W T`` for one query (length n) or a batch (n x q)."""
    T = T.toarray() if sp.issparse(T) else np.asarray(T, dtype=np.float64)
    single = T.ndim == 1
    T2 = T[:, None] if single else T
    if T2.shape[0] != p.n_terms:
        raise ValueError(f"query has {T2.shape[0]} terms, expected {p.n_terms}")
    f = p.factors
    if f is None:
        out = p.W @ T2 + p.g[:, None]
    else:
        latent = (f.U[:-1].T @ T2 + f.U[-1][:, None]) / f.sigma[:, None]
        out = f.V @ latent
    return out[:, 0] if single else out


def rank_mrf(
    q, p: MrfParameters, query_id: int = 0, top_n=None, *, probability: bool = False
) -> RankedList:
    """Rank documents by ``g_i + W[i] . T`` for a binary query vector.

    With ``probability=True`` the reported scores are ``sigmoid`` of the
    activation; the order is always taken from the activation itself.
    """
    values = q.values if isinstance(q, QueryVector) else q
    T = _binary(values, "query")
    raw = doc_scores(p, T)
    ranked = RankedList.from_scores(query_id, raw, top_n=top_n)
    if probability:
        return RankedList(query_id, ranked.doc_ids, expit(ranked.scores))
    return ranked
