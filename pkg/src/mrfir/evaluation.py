"""Average precision, MAP, interpolated precision-recall curves and report files."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import QrelSet
from .vsm import RankedList

__all__ = [
    "RECALL_LEVELS",
    "PrCurve",
    "SweepResult",
    "relevance_vector",
    "average_precision",
    "mean_average_precision",
    "pr_curve",
    "average_curves",
    "write_ap_tsv",
    "write_pr_csv",
    "write_sweep_csv",
    "write_summary_json",
]

RECALL_LEVELS = np.linspace(0.0, 1.0, 11)


def _relevant_set(qrels, query_id) -> set:
    if isinstance(qrels, QrelSet):
        if query_id is None:
            raise ValueError("query_id is required with a QrelSet")
        return qrels.relevant(query_id)
    return set(qrels)


def relevance_vector(ranked: RankedList, relevant: Iterable[int]) -> np.ndarray:
    """Boolean array, True where the document at that rank is relevant."""
    rel = np.fromiter(set(relevant), dtype=np.int64)
    return np.isin(ranked.doc_ids, rel)


def average_precision(ranked: RankedList, qrels, query_id=None) -> float | None:
    """Non-interpolated average precision over the whole ranking.

    ``qrels`` is a :class:`QrelSet` (with ``query_id``) or a collection of
    relevant doc ids. Returns ``None`` when the query has no relevant
    documents, in which case the caller should skip it.
    """
    relevant = _relevant_set(qrels, query_id)
    if not relevant:
        return None
    hits = relevance_vector(ranked, relevant)
    ranks = np.flatnonzero(hits) + 1
    if ranks.size == 0:
        return 0.0
    precisions = np.arange(1, ranks.size + 1) / ranks
    return float(precisions.sum() / len(relevant))


def mean_average_precision(per_query: Sequence[float]) -> float:
    if len(per_query) == 0:
        raise ValueError("mean average precision of an empty query set")
    return float(np.mean(np.asarray(per_query, dtype=float)))


@dataclass(frozen=True)
class PrCurve:
    """Interpolated precision at the 11 standard recall levels."""

    recall: np.ndarray
    precision: np.ndarray

    def points(self) -> list[tuple[float, float]]:
        return [(float(r), float(p)) for r, p in zip(self.recall, self.precision)]


def pr_curve(ranked: RankedList, qrels, query_id=None) -> PrCurve | None:
    """11-point curve: precision at recall ``r`` is the best precision at any
    recall >= ``r``. ``None`` when there are no relevant documents."""
    relevant = _relevant_set(qrels, query_id)
    if not relevant:
        return None
    hits = relevance_vector(ranked, relevant)
    found = np.cumsum(hits)
    ranks = np.arange(1, hits.size + 1)
    recall = found / len(relevant)
    precision = found / ranks
    interp = np.zeros(RECALL_LEVELS.size)
    if hits.size:
        # running max from the bottom of the ranking upward
        best_below = np.maximum.accumulate(precision[::-1])[::-1]
        pos = np.searchsorted(recall, RECALL_LEVELS - 1e-12, side="left")
        ok = pos < hits.size
        interp[ok] = best_below[pos[ok]]
    return PrCurve(RECALL_LEVELS.copy(), interp)


def average_curves(curves: Sequence[PrCurve]) -> PrCurve:
    if not curves:
        raise ValueError("no curves to average")
    return PrCurve(RECALL_LEVELS.copy(), np.mean([c.precision for c in curves], axis=0))


@dataclass
class SweepResult:
    model: str
    collection: str
    rows: list = field(default_factory=list)  # (k, map) with k increasing
    failures: dict = field(default_factory=dict)  # k -> error message

    def best(self) -> tuple[int, float]:
        if not self.rows:
            raise ValueError("sweep has no successful rows")
        return max(self.rows, key=lambda r: (r[1], -r[0]))


def _ensure_parent(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_ap_tsv(path, rows: Iterable[tuple]) -> None:
    """Per-query average precision: ``query_id<TAB>ap``."""
    with _ensure_parent(path).open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["query_id", "ap"])
        for qid, ap in rows:
            w.writerow([qid, f"{ap:.6f}"])


def write_pr_csv(path, curve: PrCurve) -> None:
    with _ensure_parent(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["recall", "precision"])
        for r, p in curve.points():
            w.writerow([f"{r:.1f}", f"{p:.6f}"])


def write_sweep_csv(path, result: SweepResult) -> None:
    with _ensure_parent(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "map"])
        for k, m in result.rows:
            w.writerow([k, f"{m:.6f}"])


def write_summary_json(path, runs: list[dict]) -> None:
    """Run summaries, each with at least model, k, map and skipped_queries."""
    with _ensure_parent(path).open("w") as fh:
        json.dump(runs, fh, indent=2, sort_keys=True)
        fh.write("\n")
