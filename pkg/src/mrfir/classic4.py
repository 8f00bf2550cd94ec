"""Locate and load the Classic4 collections (CRAN, CACM, CISI, MED).

The public distributions differ in file names and qrels layout:

* ``cranqrel`` lists ``qid docid code`` with graded codes (-1 = not relevant),
  and refers to queries by their position in ``cran.qry`` rather than by the
  ``.I`` number, so CRAN queries are renumbered 1..N on load.
* ``qrels.text`` (CACM) and ``CISI.REL`` carry two trailing placeholder
  columns; every listed pair is relevant.
* ``MED.REL`` is either ``qid 0 docid 1`` (TREC) or a plain listing.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    Collection,
    QrelSet,
    RawDocument,
    RawQuery,
    parse_qrels,
    parse_smart,
)

__all__ = [
    "COLLECTIONS",
    "CollectionFiles",
    "TestCollection",
    "locate_collections",
    "detect_qrels_layout",
    "load_classic4",
]

log = logging.getLogger(__name__)

COLLECTIONS = (Collection.CRAN, Collection.CACM, Collection.CISI, Collection.MED)

# (document files, query files, qrels files), matched case-insensitively
_FILE_NAMES = {
    Collection.CRAN: (("cran.all.1400", "cran.all"), ("cran.qry",), ("cranqrel", "cran.rel", "cran.qrels")),
    Collection.CACM: (("cacm.all",), ("query.text", "cacm.qry"), ("qrels.text", "cacm.rel", "cacm.qrels")),
    Collection.CISI: (("cisi.all",), ("cisi.qry",), ("cisi.rel", "cisi.qrels")),
    Collection.MED: (("med.all",), ("med.qry",), ("med.rel", "med.qrels")),
}

_DEFAULT_LAYOUT = {
    Collection.CRAN: "graded",
    Collection.CACM: "listing",
    Collection.CISI: "listing",
    Collection.MED: None,  # detected
}


@dataclass(frozen=True)
class CollectionFiles:
    collection: Collection
    docs: Path
    queries: Path | None
    qrels: Path | None


def locate_collections(root) -> dict[Collection, CollectionFiles]:
    """Find Classic4 files anywhere under ``root`` (file names as distributed)."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    found: dict[str, Path] = {}
    for dirpath, _, files in sorted(os.walk(root)):
        for name in sorted(files):
            found.setdefault(name.lower(), Path(dirpath) / name)

    def pick(names):
        for n in names:
            if n in found:
                return found[n]
        return None

    out = {}
    for coll, (docs, queries, qrels) in _FILE_NAMES.items():
        d = pick(docs)
        if d is not None:
            out[coll] = CollectionFiles(coll, d, pick(queries), pick(qrels))
    return out


def detect_qrels_layout(text: str) -> str:
    """``trec`` if every line looks like ``qid 0 docid code``, else ``listing``."""
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if rows and all(len(r) == 4 and r[1] == "0" for r in rows):
        return "trec"
    return "listing"


@dataclass
class TestCollection:
    """Documents of all loaded collections in one global order, plus the
    per-collection queries and judgments (in collection-local ids)."""

    __test__ = False  # not a pytest class

    documents: list[RawDocument]
    queries: dict = field(default_factory=dict)  # Collection -> list[RawQuery]
    qrels: dict = field(default_factory=dict)  # Collection -> QrelSet
    dropped_qrels: dict = field(default_factory=dict)  # Collection -> int

    def __post_init__(self):
        self._index = {(d.collection, d.id): i for i, d in enumerate(self.documents)}
        if len(self._index) != len(self.documents):
            raise ValueError("duplicate (collection, id) document keys")

    @property
    def collections(self) -> list[Collection]:
        seen = []
        for d in self.documents:
            if d.collection not in seen:
                seen.append(d.collection)
        return seen

    def doc_key(self, i: int) -> str:
        d = self.documents[i]
        return f"{d.collection.value}:{d.id}"

    def doc_index(self, collection: Collection, doc_id: int) -> int:
        return self._index[(Collection(collection), doc_id)]

    def query(self, collection: Collection, query_id: int) -> RawQuery:
        for q in self.queries.get(Collection(collection), ()):
            if q.id == query_id:
                return q
        raise KeyError(f"unknown query {Collection(collection).value}:{query_id}")

    def relevant(self, collection: Collection) -> dict[int, set[int]]:
        """Query id -> global indices of its relevant documents."""
        collection = Collection(collection)
        out: dict[int, set[int]] = {q.id: set() for q in self.queries.get(collection, ())}
        for qid, did in self.qrels.get(collection, QrelSet()).entries:
            out.setdefault(qid, set()).add(self._index[(collection, did)])
        return out

    def report(self) -> dict:
        per = {}
        for coll in self.collections:
            per[coll.value] = {
                "documents": sum(1 for d in self.documents if d.collection is coll),
                "queries": len(self.queries.get(coll, ())),
                "qrels": len(self.qrels.get(coll, QrelSet())),
                "queries_with_judgments": len(self.qrels.get(coll, QrelSet()).query_ids()),
                "dropped_qrels": self.dropped_qrels.get(coll, 0),
            }
        return per


def _read(path: Path) -> str:
    return path.read_text(encoding="latin-1")


def load_classic4(root, collections=None) -> TestCollection:
    """Parse every Classic4 collection found under ``root``.

    Judgments naming a document or query that does not exist are dropped and
    counted in ``dropped_qrels``.
    """
    located = locate_collections(root)
    wanted = [Collection(c) for c in collections] if collections else list(COLLECTIONS)
    located = {c: f for c, f in located.items() if c in wanted}
    if not located:
        raise FileNotFoundError(f"no Classic4 collection files found under {root}")

    documents: list[RawDocument] = []
    queries, qrels, dropped = {}, {}, {}
    for coll in COLLECTIONS:
        files = located.get(coll)
        if files is None:
            continue
        docs = parse_smart(_read(files.docs), "docs", coll)
        documents.extend(docs)
        qs: list[RawQuery] = []
        if files.queries is not None:
            qs = parse_smart(_read(files.queries), "queries", coll)
            if coll is Collection.CRAN:
                qs = [RawQuery(i, q.text, coll) for i, q in enumerate(qs, start=1)]
        queries[coll] = qs
        rel = QrelSet()
        if files.qrels is not None:
            text = _read(files.qrels)
            layout = _DEFAULT_LAYOUT[coll] or detect_qrels_layout(text)
            rel = parse_qrels(text, layout)
        doc_ids = {d.id for d in docs}
        query_ids = {q.id for q in qs}
        kept = frozenset((q, d) for q, d in rel.entries if q in query_ids and d in doc_ids)
        dropped[coll] = len(rel) - len(kept)
        if dropped[coll]:
            log.warning("%s: dropped %d judgments naming unknown ids", coll.value, dropped[coll])
        qrels[coll] = QrelSet(kept)
    return TestCollection(documents, queries, qrels, dropped)
