"""Mixed text+math query parsing, ranked retrieval, snippets, suggestions.

Queries combine free text with `$...$` LaTeX segments and pasted `<math>`
fragments (auto-detected).  Retrieval is OR-semantics tf-idf: text clauses
contribute (1+ln f)·ln(1+N/df) per field, math clauses contribute
β·qw·f·ln(1+N/df) per matched term where f is the indexed weight sum and
qw the query-side term weight.  explain() shares execute()'s scoring path
node for node, so explanation totals equal ranking scores exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .analyzer import tokenize_text, tokenize_text_with_offsets
from .canonical import canonicalize, split_encodings
from .latex import ContentUnsupported, LatexError, derive_content, parse_latex
from .mathml import (
    CONTENT,
    Formula,
    ParseError,
    PRESENTATION,
    SOURCE_QUERY,
    parse_mathml,
    serialize_node,
)
from .store import FACET_FIELDS, TEXT_FIELDS, DocumentRecord, IndexSnapshot
from .tokenizer import token_prefix, tokenize_formula

MATH_MODES = ("pmml", "cmml", "both")

_MATH_TAG_RE = re.compile(r"<(/?)math(?![0-9A-Za-z])[^>]*>")


class QueryError(Exception):
    """No usable clause survived parsing."""

    def __init__(self, message: str, warnings: list[str] | None = None):
        super().__init__(message)
        self.warnings = warnings or []


class NotAMatch(Exception):
    """explain() was asked about a document the query does not match."""


@dataclass(frozen=True)
class TextClause:
    term: str


@dataclass(frozen=True)
class MathClause:
    formula: Formula
    source: str  # latex | mathml


@dataclass
class Query:
    clauses: list
    facet_filters: dict[str, set[str]] = field(default_factory=dict)
    math_mode: str = "both"
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class SnippetSpan:
    start: int
    end: int
    kind: str  # text-match | math-match


@dataclass(frozen=True)
class Snippet:
    text: str
    spans: tuple[SnippetSpan, ...]


@dataclass(frozen=True)
class SearchHit:
    doc_id: str
    score: float
    snippet: Snippet
    facets: dict


@dataclass(frozen=True)
class ExplanationNode:
    clause: str
    term: str
    field: str
    tf: float
    idf: float
    weight: float
    beta: float
    contribution: float


@dataclass(frozen=True)
class ScoreExplanation:
    doc_id: str
    total: float
    beta: float
    nodes: tuple[ExplanationNode, ...]


@dataclass(frozen=True)
class SearchResult:
    hits: tuple[SearchHit, ...]
    total: int
    facet_counts: dict


def _find_math_segment(raw: str, start: int) -> int | None:
    """End offset of the `<math ...</math>` block opening at `start`."""
    depth = 0
    for match in _MATH_TAG_RE.finditer(raw, start):
        if match.group(1) == "/":
            depth -= 1
            if depth == 0:
                return match.end()
        elif match.group(0).endswith("/>"):
            if depth == 0:
                return match.end()
        else:
            depth += 1
    return None


def parse_query(raw: str) -> Query:
    """Segment a raw query into text and math clauses.

    `$...$` parses as LaTeX, `<math>...</math>` as MathML; both are
    canonicalized immediately.  A failed math segment is dropped with a
    warning.  Raises QueryError when nothing survives.
    """
    clauses: list = []
    warnings: list[str] = []
    text_parts: list[str] = []

    def flush_text() -> None:
        if text_parts:
            for token in tokenize_text("".join(text_parts)):
                clauses.append(TextClause(token))
            text_parts.clear()

    i, n = 0, len(raw)
    while i < n:
        ch = raw[i]
        if ch == "$":
            closing = raw.find("$", i + 1)
            if closing == -1:
                text_parts.append(raw[i:])
                break
            flush_text()
            segment = raw[i + 1:closing]
            try:
                formula = canonicalize(parse_latex(segment))
                clauses.append(MathClause(formula, "latex"))
            except LatexError as exc:
                warnings.append(
                    "dropped math segment $%s$: %s" % (segment, exc.message)
                )
            i = closing + 1
            continue
        if raw.startswith("<math", i) and (
            i + 5 >= n or not raw[i + 5].isalnum()
        ):
            end = _find_math_segment(raw, i)
            if end is not None:
                flush_text()
                segment = raw[i:end]
                try:
                    parsed = parse_mathml(segment, source=SOURCE_QUERY)
                    clauses.append(MathClause(canonicalize(parsed), "mathml"))
                except ParseError as exc:
                    warnings.append(
                        "dropped math segment %s: %s" % (segment, exc.message)
                    )
                i = end
                continue
        text_parts.append(ch)
        i += 1
    flush_text()
    if not clauses:
        raise QueryError("query contains no usable clauses", warnings)
    return Query(clauses=clauses, warnings=warnings)


# -- scoring core (shared verbatim by execute and explain) -------------------


def expand_math_clause(
    formula: Formula, snapshot: IndexSnapshot, math_mode: str
) -> list[tuple[str, float]]:
    """Query-side (token, weight) pairs for one math clause.

    Both encodings are expanded (deriving Content when only presentation
    markup exists), then filtered by math_mode prefix.
    """
    parts = split_encodings(formula)
    if not any(p.encoding == CONTENT for p in parts):
        presentation = next(
            (p for p in parts if p.encoding == PRESENTATION), None
        )
        if presentation is not None:
            try:
                parts.append(canonicalize(derive_content(presentation)))
            except ContentUnsupported:
                pass
    pairs: list[tuple[str, float]] = []
    for part in parts:
        prefix = token_prefix(part.encoding)
        if math_mode == "pmml" and prefix != "P:":
            continue
        if math_mode == "cmml" and prefix != "C:":
            continue
        for term in tokenize_formula(part, snapshot.weights):
            pairs.append((term.token, term.weight))
    return pairs


@dataclass(frozen=True)
class _Plan:
    label: str
    kind: str  # text | math
    text_term: str = ""
    math_terms: tuple[tuple[str, float], ...] = ()


def _build_plans(q: Query, snapshot: IndexSnapshot) -> list[_Plan]:
    if q.math_mode not in MATH_MODES:
        raise ValueError("unknown math_mode %r" % q.math_mode)
    plans = []
    for clause in q.clauses:
        if isinstance(clause, TextClause):
            plans.append(
                _Plan(label="text:%s" % clause.term, kind="text",
                      text_term=clause.term)
            )
        else:
            terms = expand_math_clause(clause.formula, snapshot, q.math_mode)
            plans.append(
                _Plan(
                    label="math:%s" % serialize_node(clause.formula.root),
                    kind="math",
                    math_terms=tuple(terms),
                )
            )
    return plans


def _candidates(plans: list[_Plan], snapshot: IndexSnapshot) -> set[str]:
    docs: set[str] = set()
    for plan in plans:
        if plan.kind == "text":
            for field_name in TEXT_FIELDS:
                docs.update(snapshot.postings(field_name, plan.text_term))
        else:
            for token, _ in plan.math_terms:
                docs.update(snapshot.postings("math", token))
    return docs


def _passes_filters(doc_id: str, q: Query, snapshot: IndexSnapshot) -> bool:
    if not q.facet_filters:
        return True
    values = snapshot.facet_values(doc_id)
    for field_name, wanted in q.facet_filters.items():
        if field_name not in FACET_FIELDS:
            return False
        if not set(values[field_name]) & set(wanted):
            return False
    return True


def _doc_nodes(
    doc_id: str, plans: list[_Plan], snapshot: IndexSnapshot, beta: float
) -> list[ExplanationNode]:
    n_docs = snapshot.doc_count
    nodes: list[ExplanationNode] = []
    for plan in plans:
        if plan.kind == "text":
            for field_name in TEXT_FIELDS:
                postings = snapshot.postings(field_name, plan.text_term)
                posting = postings.get(doc_id)
                if posting is None:
                    continue
                tf = 1.0 + math.log(posting.frequency)
                idf = math.log(1.0 + n_docs / len(postings))
                nodes.append(ExplanationNode(
                    clause=plan.label, term=plan.text_term, field=field_name,
                    tf=tf, idf=idf, weight=1.0, beta=1.0,
                    contribution=tf * idf * 1.0 * 1.0,
                ))
        else:
            for token, qw in plan.math_terms:
                postings = snapshot.postings("math", token)
                posting = postings.get(doc_id)
                if posting is None:
                    continue
                tf = posting.frequency
                idf = math.log(1.0 + n_docs / len(postings))
                nodes.append(ExplanationNode(
                    clause=plan.label, term=token, field="math",
                    tf=tf, idf=idf, weight=qw, beta=beta,
                    contribution=tf * idf * qw * beta,
                ))
    return nodes


def _score(nodes: list[ExplanationNode]) -> float:
    total = 0.0
    for node in nodes:
        total += node.contribution
    return total


def execute(
    q: Query,
    snapshot: IndexSnapshot,
    page: int = 1,
    page_size: int = 10,
    math_weight: float | None = None,
) -> SearchResult:
    """Ranked OR retrieval with facet filtering and pagination.

    Hits are ordered score descending, then doc id ascending.  Facet
    counts cover the full filtered candidate set, not just the page.
    """
    beta = snapshot.math_weight if math_weight is None else math_weight
    plans = _build_plans(q, snapshot)
    matched = _candidates(plans, snapshot)
    filtered = [d for d in matched if _passes_filters(d, q, snapshot)]
    per_doc = {d: _doc_nodes(d, plans, snapshot, beta) for d in filtered}
    ranked = sorted(
        ((d, _score(nodes)) for d, nodes in per_doc.items()),
        key=lambda pair: (-pair[1], pair[0]),
    )
    window = snapshot.snippet_window
    start = max(page - 1, 0) * page_size
    hits = []
    for doc_id, score in ranked[start:start + page_size]:
        rec = snapshot.get_doc(doc_id)
        hits.append(SearchHit(
            doc_id=doc_id,
            score=score,
            snippet=_hit_snippet(rec, plans, snapshot, window),
            facets=snapshot.facet_values(doc_id),
        ))
    facet_counts = {
        field_name: snapshot.facet_counts(field_name, set(filtered))
        for field_name in FACET_FIELDS
    }
    return SearchResult(hits=tuple(hits), total=len(filtered),
                        facet_counts=facet_counts)


def explain(
    q: Query,
    doc_id: str,
    snapshot: IndexSnapshot,
    math_weight: float | None = None,
) -> ScoreExplanation:
    """Additive decomposition of one document's score for a query.

    Raises NotAMatch when the document matches no clause term or fails
    the query's facet filters.
    """
    beta = snapshot.math_weight if math_weight is None else math_weight
    plans = _build_plans(q, snapshot)
    nodes = _doc_nodes(doc_id, plans, snapshot, beta)
    if not nodes or not _passes_filters(doc_id, q, snapshot):
        raise NotAMatch("document %r does not match the query" % doc_id)
    return ScoreExplanation(
        doc_id=doc_id, total=_score(nodes), beta=beta, nodes=tuple(nodes)
    )


# -- snippets ----------------------------------------------------------------


def _matched_text_terms(
    doc_id: str, plans: list[_Plan], snapshot: IndexSnapshot
) -> set[str]:
    terms = set()
    for plan in plans:
        if plan.kind != "text":
            continue
        for field_name in TEXT_FIELDS:
            if doc_id in snapshot.postings(field_name, plan.text_term):
                terms.add(plan.text_term)
    return terms


def _matched_math_spans(
    doc_id: str, plans: list[_Plan], snapshot: IndexSnapshot
) -> dict[tuple[int, int], set[str]]:
    spans: dict[tuple[int, int], set[str]] = {}
    for plan in plans:
        if plan.kind != "math":
            continue
        for token, _ in plan.math_terms:
            posting = snapshot.postings("math", token).get(doc_id)
            if posting is None:
                continue
            for span in posting.positions:
                spans.setdefault(tuple(span), set()).add(token)
    return spans


def _hit_snippet(
    rec: DocumentRecord,
    plans: list[_Plan],
    snapshot: IndexSnapshot,
    window: int,
) -> Snippet:
    text_terms = _matched_text_terms(rec.id, plans, snapshot)
    math_spans = _matched_math_spans(rec.id, plans, snapshot)
    return build_snippet(rec, text_terms, math_spans, window)


def build_snippet(
    rec: DocumentRecord,
    text_terms: set[str],
    math_spans: dict[tuple[int, int], set[str]],
    window: int = 240,
) -> Snippet:
    """Window of extracted_text maximizing distinct matched terms.

    Ties go to the earliest window.  Spans are emitted relative to the
    final snippet string, ellipses included, and typed text-match or
    math-match by the term that produced them.
    """
    text = rec.extracted_text
    blocked = [fs.span for fs in rec.formulae]
    occurrences: list[tuple[int, int, str, frozenset[str]]] = []
    if text_terms:
        for token, start, end in tokenize_text_with_offsets(text):
            if token not in text_terms:
                continue
            if any(start < b_end and end > b_start for b_start, b_end in blocked):
                continue
            occurrences.append((start, end, "text-match", frozenset([token])))
    for span, tokens in math_spans.items():
        occurrences.append((span[0], span[1], "math-match", frozenset(tokens)))
    occurrences.sort(key=lambda o: (o[0], o[1]))

    if len(text) <= window:
        chosen_start = 0
    elif not occurrences:
        chosen_start = 0
    else:
        best_start, best_score = 0, -1
        max_start = len(text) - window
        for occ in occurrences:
            w = min(max(occ[0], 0), max_start)
            keys: set[str] = set()
            for start, end, _, occ_keys in occurrences:
                if start >= w and end <= w + window:
                    keys.update(occ_keys)
            score = len(keys)
            if score > best_score:
                best_start, best_score = w, score
        chosen_start = best_start

    end_limit = min(chosen_start + window, len(text))
    prefix = "…" if chosen_start > 0 else ""
    suffix = "…" if end_limit < len(text) else ""
    body = text[chosen_start:end_limit]
    spans = []
    seen = set()
    for start, end, kind, _ in occurrences:
        if start < chosen_start or end > end_limit:
            continue
        shifted = SnippetSpan(
            start - chosen_start + len(prefix), end - chosen_start + len(prefix), kind
        )
        if shifted not in seen:
            seen.add(shifted)
            spans.append(shifted)
    return Snippet(text=prefix + body + suffix, spans=tuple(spans))


# -- suggestions --------------------------------------------------------------


def suggest(snapshot: IndexSnapshot, prefix: str, k: int = 8) -> list[str]:
    """Top-k unigrams and bigrams whose first token starts with prefix.

    Ordered by corpus frequency descending, then lexicographically.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    needle = prefix.lower()
    candidates: list[tuple[str, int]] = []
    for token, count in snapshot.unigrams.items():
        if token.startswith(needle):
            candidates.append((token, count))
    for bigram, count in snapshot.bigrams.items():
        if bigram.split(" ", 1)[0].startswith(needle):
            candidates.append((bigram, count))
    candidates.sort(key=lambda item: (-item[1], item[0]))
    return [term for term, _ in candidates[:k]]
