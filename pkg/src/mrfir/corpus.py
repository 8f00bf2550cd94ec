"""SMART-format parsing, text analysis, vocabulary and term-document counts."""

from __future__ import annotations

import enum
import hashlib
import io
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO, Union

import numpy as np
import scipy.sparse as sp

from .porter import stem

__all__ = [
    "Collection",
    "Weighting",
    "ParseError",
    "RawDocument",
    "RawQuery",
    "QrelSet",
    "Vocabulary",
    "TermDocumentMatrix",
    "parse_smart",
    "serialize_smart",
    "parse_qrels",
    "serialize_qrels",
    "tokenize",
    "analyze",
    "build_vocabulary",
    "build_count_matrix",
]

TextSource = Union[str, TextIO, Iterable[str]]


class Collection(str, enum.Enum):
    CRAN = "CRAN"
    CACM = "CACM"
    CISI = "CISI"
    MED = "MED"
    OTHER = "OTHER"


class Weighting(str, enum.Enum):
    RAW_COUNT = "RAW_COUNT"
    TFIDF = "TFIDF"


class ParseError(ValueError):
    """Malformed input; ``lineno`` is 1-based (0 when not tied to a line)."""

    def __init__(self, message: str, lineno: int = 0):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


@dataclass(frozen=True)
class RawDocument:
    id: int
    text: str
    collection: Collection = Collection.OTHER


@dataclass(frozen=True)
class RawQuery:
    id: int
    text: str
    collection: Collection = Collection.OTHER


def _lines(source: TextSource) -> Iterable[str]:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


_MARKER = re.compile(r"^\.([A-Z])\b(.*)$")
_KEPT_SECTIONS = ("T", "W")


def parse_smart(
    source: TextSource,
    kind: str = "docs",
    collection: Collection = Collection.OTHER,
) -> list:
    """Parse SMART markup into ``RawDocument`` (``kind="docs"``) or
    ``RawQuery`` (``kind="queries"``) records, in file order.

    Only the ``.T`` and ``.W`` sections contribute text (title first); every
    other section is skipped. Whitespace inside the text is collapsed.
    """
    kind = kind.lower()
    if kind not in ("docs", "queries"):
        raise ValueError(f"kind must be 'docs' or 'queries', got {kind!r}")
    make = RawDocument if kind == "docs" else RawQuery
    collection = Collection(collection)

    records = []
    seen: set[int] = set()
    current_id: int | None = None
    start_line = 0
    sections: dict[str, list[str]] = {}
    section: str | None = None

    def flush():
        parts = []
        for name in _KEPT_SECTIONS:
            words = " ".join(sections.get(name, ())).split()
            if words:
                parts.append(" ".join(words))
        text = " ".join(parts)
        if not text:
            raise ParseError(f"record .I {current_id} has no .T/.W text", start_line)
        records.append(make(id=current_id, text=text, collection=collection))

    for lineno, raw in enumerate(_lines(source), start=1):
        line = raw.rstrip("\r\n")
        m = _MARKER.match(line)
        if m:
            tag, rest = m.group(1), m.group(2).strip()
            if tag == "I":
                if current_id is not None:
                    flush()
                try:
                    new_id = int(rest)
                except ValueError:
                    raise ParseError(f"malformed .I line {line!r}", lineno) from None
                if new_id < 1:
                    raise ParseError(f"record id must be positive, got {new_id}", lineno)
                if new_id in seen:
                    raise ParseError(f"duplicate record id {new_id}", lineno)
                seen.add(new_id)
                current_id, start_line = new_id, lineno
                sections, section = {}, None
                continue
            if current_id is None:
                raise ParseError(f"section .{tag} before any .I marker", lineno)
            section = tag
            sections.setdefault(tag, [])
            if rest:
                sections[tag].append(rest)
            continue
        if current_id is None:
            if line.strip():
                raise ParseError("text before the first .I marker", lineno)
            continue
        if section is not None:
            sections[section].append(line)

    if current_id is not None:
        flush()
    return records


def serialize_smart(records: Sequence) -> str:
    """Inverse of :func:`parse_smart` for already-parsed records."""
    out = []
    for r in records:
        out.append(f".I {r.id}\n.W\n{r.text}\n")
    return "".join(out)


@dataclass(frozen=True)
class QrelSet:
    """Binary relevance judgments as (query id, doc id) pairs."""

    entries: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "entries", frozenset(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, pair) -> bool:
        return pair in self.entries

    def query_ids(self) -> list[int]:
        return sorted({q for q, _ in self.entries})

    def relevant(self, query_id: int) -> set[int]:
        return {d for q, d in self.entries if q == query_id}

    def by_query(self) -> dict[int, set[int]]:
        out: dict[int, set[int]] = {}
        for q, d in self.entries:
            out.setdefault(q, set()).add(d)
        return out

    def validate(self, query_ids: Iterable[int], doc_ids: Iterable[int]) -> None:
        """Raise ``ValueError`` if a judgment names an unknown query or doc."""
        qs, ds = set(query_ids), set(doc_ids)
        bad_q = sorted({q for q, _ in self.entries} - qs)
        bad_d = sorted({d for _, d in self.entries} - ds)
        if bad_q or bad_d:
            raise ValueError(
                f"qrels reference unknown queries {bad_q[:10]} / documents {bad_d[:10]}"
            )


_QREL_LAYOUTS = ("graded", "trec", "listing")


def parse_qrels(source: TextSource, layout: str = "graded") -> QrelSet:
    """Parse whitespace-separated relevance judgments.

    Layouts:

    ``graded``  ``qid docid [code ...]``; relevant when the first code is
                >= 1 or when no code is present.
    ``trec``    ``qid iteration docid code``; relevant when code >= 1.
    ``listing`` ``qid docid [ignored ...]``; every listed pair is relevant.
    """
    if layout not in _QREL_LAYOUTS:
        raise ValueError(f"unknown qrels layout {layout!r}")
    pairs = set()
    for lineno, line in enumerate(_lines(source), start=1):
        fields = line.split()
        if not fields:
            continue
        try:
            if layout == "trec":
                if len(fields) < 4:
                    raise ParseError("expected 'qid iter docid code'", lineno)
                qid, did, code = int(fields[0]), int(fields[2]), float(fields[3])
            else:
                if len(fields) < 2:
                    raise ParseError("expected 'qid docid [code]'", lineno)
                qid, did = int(fields[0]), int(fields[1])
                code = float(fields[2]) if layout == "graded" and len(fields) > 2 else 1.0
                for extra in fields[2:]:
                    float(extra)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"non-numeric field in {line.strip()!r}", lineno) from None
        if code >= 1:
            pairs.add((qid, did))
    return QrelSet(frozenset(pairs))


def serialize_qrels(qrels: QrelSet) -> str:
    return "".join(f"{q} {d}\n" for q, d in sorted(qrels.entries))


_NON_ALPHA = re.compile(r"[^a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every non-alphabetic character."""
    return [t for t in _NON_ALPHA.split(text.lower()) if t]


def analyze(text: str, min_len: int = 3) -> list[str]:
    """Tokenize, drop tokens shorter than ``min_len``, Porter-stem the rest."""
    return [stem(t) for t in tokenize(text) if len(t) >= min_len]


def _text(doc) -> str:
    return doc if isinstance(doc, str) else doc.text


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple
    df: np.ndarray
    min_len: int = 3
    max_df_frac: float = 0.95
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "df", np.asarray(self.df, dtype=np.int64))
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})
        if len(self.index) != len(self.terms):
            raise ValueError("duplicate vocabulary terms")
        if self.df.shape != (len(self.terms),):
            raise ValueError("df length does not match term count")

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def digest(self) -> str:
        """Stable hash of the ordered term list."""
        h = hashlib.sha256("\n".join(self.terms).encode("utf-8"))
        return h.hexdigest()

    def encode(self, text: str) -> Counter:
        """Vocabulary-index counts for ``text``; out-of-vocabulary stems dropped."""
        idx = self.index
        return Counter(idx[s] for s in analyze(text, self.min_len) if s in idx)


def build_vocabulary(
    docs: Sequence, min_len: int = 3, max_df_frac: float = 0.95
) -> Vocabulary:
    """Lexicographically ordered stems with ``df / N < max_df_frac``.

    Token length is checked before stemming. ``max_df_frac=1`` disables the
    common-term filter (otherwise a one-document corpus could keep nothing).
    """
    if min_len < 1:
        raise ValueError(f"min_len must be >= 1, got {min_len}")
    if not 0 < max_df_frac <= 1:
        raise ValueError(f"max_df_frac must be in (0, 1], got {max_df_frac}")
    if len(docs) == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    n_docs = len(docs)
    df: Counter = Counter()
    for doc in docs:
        df.update(set(analyze(_text(doc), min_len)))
    if max_df_frac >= 1:
        terms = sorted(df)
    else:
        terms = sorted(t for t, c in df.items() if c / n_docs < max_df_frac)
    return Vocabulary(
        terms=tuple(terms),
        df=np.array([df[t] for t in terms], dtype=np.int64),
        min_len=min_len,
        max_df_frac=max_df_frac,
    )


@dataclass(frozen=True)
class TermDocumentMatrix:
    """Sparse terms x documents matrix of non-negative weights."""

    matrix: sp.csc_matrix
    weighting: Weighting = Weighting.RAW_COUNT

    def __post_init__(self):
        m = sp.csc_matrix(self.matrix, dtype=np.float64)
        m.sum_duplicates()
        m.eliminate_zeros()
        if not np.all(np.isfinite(m.data)):
            raise ValueError("term-document matrix has non-finite entries")
        if np.any(m.data < 0):
            raise ValueError("term-document matrix has negative entries")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "weighting", Weighting(self.weighting))

    @property
    def n_terms(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_docs(self) -> int:
        return self.matrix.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def column(self, d: int) -> np.ndarray:
        return self.matrix[:, d].toarray().ravel()

    def document_frequency(self) -> np.ndarray:
        return np.diff(self.matrix.tocsr().indptr)


def build_count_matrix(docs: Sequence, vocab: Vocabulary) -> TermDocumentMatrix:
    """Raw stemmed-token counts ``x[t, d]`` over ``vocab``."""
    rows, cols, vals = [], [], []
    for j, doc in enumerate(docs):
        for t, c in vocab.encode(_text(doc)).items():
            rows.append(t)
            cols.append(j)
            vals.append(c)
    mat = sp.csc_matrix(
        (np.asarray(vals, dtype=np.float64), (rows, cols)),
        shape=(len(vocab), len(docs)),
    )
    return TermDocumentMatrix(mat, Weighting.RAW_COUNT)
