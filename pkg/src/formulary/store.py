"""Faceted inverted index over text and math terms, with persistence.

The build side is a single-writer IndexBuilder; commit() yields an
immutable IndexSnapshot that answers all read queries and serializes to a
single versioned file.  Math postings carry summed term weights as their
frequency, which is how formula similarity enters the scoring model on
the same footing as word counts.
"""

from __future__ import annotations

import json
import logging
import struct
import zlib
from dataclasses import dataclass, field

from .analyzer import tokenize_text, tokenize_outside_spans
from .canonical import canonicalize
from .latex import ContentUnsupported, derive_content
from .mathml import CONTENT, Formula, PRESENTATION, parse_mathml, serialize_mathml
from .tokenizer import DEFAULT_WEIGHTS, WeightConfig, tokenize_formula

log = logging.getLogger(__name__)

MAGIC = b"FMLY1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<5sIQI")  # magic, version, payload length, crc32

TEXT_FIELDS = ("title", "author", "body")
FACET_FIELDS = ("language", "author", "year")

DEFAULT_MATH_WEIGHT = 1.0
DEFAULT_SNIPPET_WINDOW = 240


class StoreError(Exception):
    """Base class for index construction and persistence failures."""


class DuplicateIdError(StoreError):
    pass


class InvalidRecordError(StoreError):
    pass


class UnknownFacetFieldError(StoreError):
    pass


class FormatVersionMismatch(StoreError):
    """The file is not an index of this format and version."""


class IndexIOError(StoreError):
    """Unreadable, truncated, or corrupted index file."""


@dataclass(frozen=True)
class FormulaSpan:
    """A canonical formula and the placeholder it owns in extracted_text.

    Split semantics pairs produce two FormulaSpans sharing one span.
    """

    formula: Formula
    span: tuple[int, int]


@dataclass(frozen=True)
class DocumentRecord:
    id: str
    title: str
    authors: tuple[str, ...]
    language: str
    year: int
    body: str
    extracted_text: str
    formulae: tuple[FormulaSpan, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "authors", tuple(self.authors))
        object.__setattr__(self, "formulae", tuple(self.formulae))

    def validate(self) -> None:
        """Raises InvalidRecordError with the first broken invariant."""
        if not isinstance(self.id, str) or not self.id:
            raise InvalidRecordError("document id must be a non-empty string")
        for name in ("title", "language", "body", "extracted_text"):
            if not isinstance(getattr(self, name), str):
                raise InvalidRecordError("%s must be a string" % name)
        if not all(isinstance(a, str) for a in self.authors):
            raise InvalidRecordError("authors must be strings")
        if isinstance(self.year, bool) or not isinstance(self.year, int):
            raise InvalidRecordError("year must be an integer")
        limit = len(self.extracted_text)
        spans = sorted(fs.span for fs in self.formulae)
        for start, end in spans:
            if not (0 <= start < end <= limit):
                raise InvalidRecordError(
                    "char_span [%d, %d) outside extracted_text bounds" % (start, end)
                )
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            # Identical spans are legal (encoding pairs share a placeholder);
            # partial overlap is not.
            if (s1, e1) != (s2, e2) and s2 < e1:
                raise InvalidRecordError("formula char_spans overlap")


@dataclass(frozen=True)
class Posting:
    doc: str
    field: str
    frequency: float
    positions: tuple


@dataclass
class _Accumulator:
    """Mutable per-(field, term) posting data during the build."""

    frequency: float = 0.0
    positions: list = field(default_factory=list)


class IndexBuilder:
    """Single-writer index construction; call commit() to freeze."""

    def __init__(
        self,
        weights: WeightConfig | None = None,
        math_weight: float = DEFAULT_MATH_WEIGHT,
        snippet_window: int = DEFAULT_SNIPPET_WINDOW,
    ):
        self.weights = weights or DEFAULT_WEIGHTS
        self.math_weight = math_weight
        self.snippet_window = snippet_window
        self._docs: dict[str, DocumentRecord] = {}
        self._postings: dict[str, dict[str, dict[str, _Accumulator]]] = {
            f: {} for f in (*TEXT_FIELDS, "math")
        }
        self._unigrams: dict[str, int] = {}
        self._bigrams: dict[str, int] = {}

    @property
    def doc_count(self) -> int:
        return len(self._docs)

    def _bump(self, field_name: str, term: str, doc_id: str) -> _Accumulator:
        by_doc = self._postings[field_name].setdefault(term, {})
        return by_doc.setdefault(doc_id, _Accumulator())

    def _index_text(self, field_name: str, tokens: list[str], doc_id: str) -> None:
        for position, token in enumerate(tokens):
            acc = self._bump(field_name, token, doc_id)
            acc.frequency += 1.0
            acc.positions.append(position)

    def _index_math(self, rec: DocumentRecord) -> None:
        # Group the stored formulae by placeholder span: each group is one
        # source formula, possibly as an encoding pair.
        groups: dict[tuple[int, int], list[Formula]] = {}
        for fs in rec.formulae:
            groups.setdefault(fs.span, []).append(fs.formula)
        for span in sorted(groups):
            formulae = list(groups[span])
            if not any(f.encoding == CONTENT for f in formulae):
                presentation = next(
                    (f for f in formulae if f.encoding == PRESENTATION), None
                )
                if presentation is not None:
                    try:
                        formulae.append(canonicalize(derive_content(presentation)))
                    except ContentUnsupported as exc:
                        log.debug(
                            "doc %s: no content terms for span %s: %s",
                            rec.id, span, exc,
                        )
            seen: set[str] = set()
            for formula in formulae:
                for term in tokenize_formula(formula, self.weights):
                    acc = self._bump("math", term.token, rec.id)
                    acc.frequency += term.weight
                    if term.token not in seen:
                        seen.add(term.token)
                        acc.positions.append(span)

    def add_document(self, rec: DocumentRecord) -> str:
        """Index one record; returns its id as the handle.

        Raises DuplicateIdError or InvalidRecordError; on error the index
        is left unchanged.
        """
        rec.validate()
        if rec.id in self._docs:
            raise DuplicateIdError("duplicate document id %r" % rec.id)
        self._docs[rec.id] = rec
        self._index_text("title", tokenize_text(rec.title), rec.id)
        author_tokens = [t for a in rec.authors for t in tokenize_text(a)]
        self._index_text("author", author_tokens, rec.id)
        spans = [fs.span for fs in rec.formulae]
        body_tokens = [
            t for t, _, _ in tokenize_outside_spans(rec.extracted_text, spans)
        ]
        self._index_text("body", body_tokens, rec.id)
        for token in body_tokens:
            self._unigrams[token] = self._unigrams.get(token, 0) + 1
        for first, second in zip(body_tokens, body_tokens[1:]):
            bigram = "%s %s" % (first, second)
            self._bigrams[bigram] = self._bigrams.get(bigram, 0) + 1
        self._index_math(rec)
        return rec.id

    def commit(self) -> IndexSnapshot:
        postings = {
            field_name: {
                term: {
                    doc: Posting(doc, field_name, acc.frequency, tuple(acc.positions))
                    for doc, acc in by_doc.items()
                }
                for term, by_doc in terms.items()
            }
            for field_name, terms in self._postings.items()
        }
        snapshot = IndexSnapshot(
            docs=dict(self._docs),
            postings=postings,
            unigrams=dict(self._unigrams),
            bigrams=dict(self._bigrams),
            weights=self.weights,
            math_weight=self.math_weight,
            snippet_window=self.snippet_window,
        )
        snapshot.validate()
        return snapshot


class IndexSnapshot:
    """Immutable committed index; safe for concurrent readers."""

    def __init__(
        self,
        docs: dict[str, DocumentRecord],
        postings: dict[str, dict[str, dict[str, Posting]]],
        unigrams: dict[str, int],
        bigrams: dict[str, int],
        weights: WeightConfig,
        math_weight: float,
        snippet_window: int,
    ):
        self._docs = docs
        self._postings = postings
        self.unigrams = unigrams
        self.bigrams = bigrams
        self.weights = weights
        self.math_weight = math_weight
        self.snippet_window = snippet_window
        self._facets = self._build_facets()

    def _build_facets(self) -> dict[str, dict[str, set[str]]]:
        facets: dict[str, dict[str, set[str]]] = {f: {} for f in FACET_FIELDS}
        for doc_id, rec in self._docs.items():
            facets["language"].setdefault(rec.language, set()).add(doc_id)
            facets["year"].setdefault(str(rec.year), set()).add(doc_id)
            for author in set(rec.authors):
                facets["author"].setdefault(author, set()).add(doc_id)
        return facets

    def facet_values(self, doc_id: str) -> dict[str, list[str]]:
        rec = self._docs[doc_id]
        return {
            "language": [rec.language],
            "author": sorted(set(rec.authors)),
            "year": [str(rec.year)],
        }

    @property
    def doc_count(self) -> int:
        return len(self._docs)

    def doc_ids(self) -> list[str]:
        return sorted(self._docs)

    def get_doc(self, doc_id: str) -> DocumentRecord | None:
        return self._docs.get(doc_id)

    def postings(self, field_name: str, term: str) -> dict[str, Posting]:
        return self._postings.get(field_name, {}).get(term, {})

    def df(self, field_name: str, term: str) -> int:
        return len(self.postings(field_name, term))

    def term_count(self, field_name: str | None = None) -> int:
        if field_name is not None:
            return len(self._postings.get(field_name, {}))
        return sum(len(terms) for terms in self._postings.values())

    def facet_docs(self, field_name: str, value: str) -> set[str]:
        if field_name not in FACET_FIELDS:
            raise UnknownFacetFieldError("unknown facet field %r" % field_name)
        return set(self._facets[field_name].get(value, set()))

    def facet_counts(
        self, field_name: str, docs: set[str] | None = None
    ) -> dict[str, int]:
        """Counts per facet value within `docs` (default: all documents).

        Zero counts are omitted; order is count descending, value ascending.
        """
        if field_name not in FACET_FIELDS:
            raise UnknownFacetFieldError("unknown facet field %r" % field_name)
        pool = self._facets[field_name]
        counts: dict[str, int] = {}
        for value, members in pool.items():
            n = len(members) if docs is None else len(members & docs)
            if n:
                counts[value] = n
        ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        return dict(ordered)

    def validate(self) -> None:
        """Post-commit invariant checks; raises InvalidRecordError."""
        for field_name, terms in self._postings.items():
            for term, by_doc in terms.items():
                for doc_id, posting in by_doc.items():
                    if doc_id not in self._docs:
                        raise InvalidRecordError(
                            "posting for unknown doc %r" % doc_id
                        )
                    if posting.frequency <= 0 or not posting.positions:
                        raise InvalidRecordError(
                            "degenerate posting %s/%r" % (field_name, term)
                        )
        n = self.doc_count
        language_total = sum(self.facet_counts("language").values())
        year_total = sum(self.facet_counts("year").values())
        if language_total != n or year_total != n:
            raise InvalidRecordError("single-valued facet counts do not sum to N")
        author_total = sum(self.facet_counts("author").values())
        expected = sum(len(set(rec.authors)) for rec in self._docs.values())
        if author_total != expected:
            raise InvalidRecordError("author facet counts do not match authorship")

    # -- persistence --------------------------------------------------------

    def _payload(self) -> dict:
        return {
            "weights": {
                "level_factor": self.weights.level_factor,
                "var_unification_factor": self.weights.var_unification_factor,
                "const_unification_factor": self.weights.const_unification_factor,
            },
            "math_weight": self.math_weight,
            "snippet_window": self.snippet_window,
            "docs": {
                doc_id: {
                    "title": rec.title,
                    "authors": list(rec.authors),
                    "language": rec.language,
                    "year": rec.year,
                    "body": rec.body,
                    "extracted_text": rec.extracted_text,
                    "formulae": [
                        {
                            "mathml": serialize_mathml(fs.formula),
                            "encoding": fs.formula.encoding,
                            "source": fs.formula.source,
                            "span": list(fs.span),
                        }
                        for fs in rec.formulae
                    ],
                }
                for doc_id, rec in self._docs.items()
            },
            "postings": {
                field_name: {
                    term: {
                        doc: {
                            "f": posting.frequency,
                            "p": [
                                list(p) if isinstance(p, tuple) else p
                                for p in posting.positions
                            ],
                        }
                        for doc, posting in by_doc.items()
                    }
                    for term, by_doc in terms.items()
                }
                for field_name, terms in self._postings.items()
            },
            "unigrams": self.unigrams,
            "bigrams": self.bigrams,
        }

    def save(self, path: str) -> None:
        """Write the single-file binary envelope; byte-stable per content."""
        body = json.dumps(
            self._payload(), sort_keys=True, separators=(",", ":"), ensure_ascii=False
        ).encode("utf-8")
        compressed = zlib.compress(body, 9)
        header = _HEADER.pack(
            MAGIC, FORMAT_VERSION, len(compressed), zlib.crc32(compressed)
        )
        try:
            with open(path, "wb") as fh:
                fh.write(header)
                fh.write(compressed)
        except OSError as exc:
            raise IndexIOError("cannot write index: %s" % exc) from exc
        log.info("saved index: %d docs, %d bytes", self.doc_count, len(compressed))


def load(path: str) -> IndexSnapshot:
    """Read an index file written by save().

    Raises FormatVersionMismatch for foreign or incompatible files and
    IndexIOError for unreadable, truncated, or corrupted ones.
    """
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IndexIOError("cannot read index: %s" % exc) from exc
    if len(blob) < _HEADER.size:
        raise IndexIOError("truncated index header")
    magic, version, length, checksum = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatVersionMismatch("not an index file (bad magic)")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(
            "index format version %d, expected %d" % (version, FORMAT_VERSION)
        )
    compressed = blob[_HEADER.size:]
    if len(compressed) != length:
        raise IndexIOError("truncated index payload")
    if zlib.crc32(compressed) != checksum:
        raise IndexIOError("index payload checksum mismatch")
    try:
        payload = json.loads(zlib.decompress(compressed).decode("utf-8"))
    except (zlib.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IndexIOError("undecodable index payload: %s" % exc) from exc
    try:
        return _from_payload(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise IndexIOError("malformed index payload: %s" % exc) from exc


def _from_payload(payload: dict) -> IndexSnapshot:
    weights = WeightConfig(**payload["weights"])
    docs: dict[str, DocumentRecord] = {}
    for doc_id, raw in payload["docs"].items():
        formulae = tuple(
            FormulaSpan(
                formula=Formula(
                    parse_mathml(item["mathml"]).root,
                    encoding=item["encoding"],
                    source=item["source"],
                ),
                span=tuple(item["span"]),
            )
            for item in raw["formulae"]
        )
        docs[doc_id] = DocumentRecord(
            id=doc_id,
            title=raw["title"],
            authors=tuple(raw["authors"]),
            language=raw["language"],
            year=raw["year"],
            body=raw["body"],
            extracted_text=raw["extracted_text"],
            formulae=formulae,
        )
    postings: dict[str, dict[str, dict[str, Posting]]] = {}
    for field_name, terms in payload["postings"].items():
        postings[field_name] = {
            term: {
                doc: Posting(
                    doc,
                    field_name,
                    entry["f"],
                    tuple(
                        tuple(p) if isinstance(p, list) else p for p in entry["p"]
                    ),
                )
                for doc, entry in by_doc.items()
            }
            for term, by_doc in terms.items()
        }
    snapshot = IndexSnapshot(
        docs=docs,
        postings=postings,
        unigrams=payload["unigrams"],
        bigrams=payload["bigrams"],
        weights=weights,
        math_weight=payload["math_weight"],
        snippet_window=payload["snippet_window"],
    )
    snapshot.validate()
    return snapshot
