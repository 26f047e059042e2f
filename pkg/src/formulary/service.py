"""HTTP facade over a read-only index snapshot.

JSON endpoints under /api/ (search, suggest, preview, explain, doc fetch)
plus an OpenSearch 1.1 description document and optional static UI assets.
All handlers are stateless over an immutable IndexSnapshot, so concurrent
requests need no locking and repeated requests return identical bytes.
"""

from __future__ import annotations

import os
from xml.sax.saxutils import escape, quoteattr

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles

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
from .query import (
    MATH_MODES,
    NotAMatch,
    QueryError,
    execute,
    explain,
    parse_query,
    suggest,
)
from .store import FACET_FIELDS, IndexSnapshot

SHORT_NAME = "Formulary"
DESCRIPTION = "Full-text search that understands mathematical notation"

_FALLBACK_PAGE = """<!DOCTYPE html>
<html lang="en">
<head><meta charset="utf-8"><title>%(name)s</title></head>
<body>
<h1>%(name)s</h1>
<form action="/search" method="get">
  <input name="q" placeholder="query, e.g. $E=mc^2$" size="60">
  <button type="submit">Search</button>
</form>
<pre id="out"></pre>
<script>
const q = new URLSearchParams(location.search).get("q");
if (q) {
  document.querySelector("input[name=q]").value = q;
  fetch("/api/search?q=" + encodeURIComponent(q))
    .then((r) => r.json())
    .then((d) => {
      document.getElementById("out").textContent = JSON.stringify(d, null, 2);
    });
}
</script>
</body>
</html>
"""


def _error(
    status: int, code: str, message: str, warnings: list[str] | None = None
) -> JSONResponse:
    body: dict = {"error": {"code": code, "message": message}}
    if warnings:
        body["error"]["warnings"] = warnings
    return JSONResponse(body, status_code=status)


def _int_param(
    request: Request, name: str, default: int, lo: int, hi: int | None = None
) -> int:
    raw = request.query_params.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise _ParamError("%s must be an integer" % name) from None
    if value < lo or (hi is not None and value > hi):
        limit = "at least %d" % lo if hi is None else "between %d and %d" % (lo, hi)
        raise _ParamError("%s must be %s" % (name, limit))
    return value


class _ParamError(Exception):
    pass


def _math_markup(formula: Formula) -> str:
    root = formula.root
    if root.element == "math":
        return serialize_node(root)
    return "<math>%s</math>" % serialize_node(root)


def _snippet_payload(snippet) -> dict:
    return {
        "text": snippet.text,
        "spans": [
            {"start": s.start, "end": s.end, "kind": s.kind}
            for s in snippet.spans
        ],
    }


def create_app(
    snapshot: IndexSnapshot,
    static_dir: str | None = None,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    """Build the application around one loaded snapshot."""
    app = FastAPI(title=SHORT_NAME, docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    def parse_search_params(request: Request):
        params = request.query_params
        q = params.get("q")
        if not q:
            return None, _error(400, "missing-parameter", "q is required")
        mathmode = params.get("mathmode", "both")
        if mathmode not in MATH_MODES:
            return None, _error(
                400, "invalid-parameter",
                "mathmode must be one of %s" % ", ".join(MATH_MODES),
            )
        filters: dict[str, set[str]] = {}
        for field_name in FACET_FIELDS:
            values = params.getlist("facet.%s" % field_name)
            if values:
                filters[field_name] = set(values)
        try:
            query = parse_query(q)
        except QueryError as exc:
            return None, _error(
                422, "no-usable-clauses", str(exc), warnings=exc.warnings
            )
        query.math_mode = mathmode
        query.facet_filters = filters
        return query, None

    @app.get("/api/search")
    def api_search(request: Request):
        try:
            page = _int_param(request, "page", 1, lo=1)
            size = _int_param(request, "size", 10, lo=1, hi=100)
        except _ParamError as exc:
            return _error(400, "invalid-parameter", str(exc))
        query, failure = parse_search_params(request)
        if failure is not None:
            return failure
        result = execute(query, snapshot, page=page, page_size=size)
        hits = []
        for hit in result.hits:
            rec = snapshot.get_doc(hit.doc_id)
            hits.append({
                "id": rec.id,
                "title": rec.title,
                "authors": list(rec.authors),
                "language": rec.language,
                "year": rec.year,
                "score": hit.score,
                "snippet": _snippet_payload(hit.snippet),
            })
        facets = {
            field_name: [
                {"value": value, "count": count}
                for value, count in result.facet_counts[field_name].items()
            ]
            for field_name in FACET_FIELDS
        }
        return {
            "total": result.total,
            "page": page,
            "hits": hits,
            "facets": facets,
            "warnings": query.warnings,
        }

    @app.get("/api/suggest")
    def api_suggest(request: Request):
        prefix = request.query_params.get("prefix")
        if not prefix:
            return _error(400, "missing-parameter", "prefix is required")
        try:
            k = _int_param(request, "k", 8, lo=1, hi=100)
        except _ParamError as exc:
            return _error(400, "invalid-parameter", str(exc))
        return {"suggestions": suggest(snapshot, prefix, k)}

    @app.post("/api/preview")
    async def api_preview(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "invalid-body", "request body must be JSON")
        if not isinstance(payload, dict):
            return _error(400, "invalid-body", "request body must be a JSON object")
        has_latex = isinstance(payload.get("latex"), str)
        has_mathml = isinstance(payload.get("mathml"), str)
        if has_latex == has_mathml:
            return _error(
                400, "invalid-body",
                "exactly one of 'latex' or 'mathml' must be provided",
            )
        warnings: list[str] = []
        presentation: Formula | None = None
        content: Formula | None = None
        if has_latex:
            try:
                presentation = canonicalize(parse_latex(payload["latex"]))
            except LatexError as exc:
                warnings.append(exc.message)
        else:
            try:
                parsed = canonicalize(
                    parse_mathml(payload["mathml"], source=SOURCE_QUERY)
                )
                for part in split_encodings(parsed):
                    if part.encoding == PRESENTATION and presentation is None:
                        presentation = part
                    elif part.encoding == CONTENT and content is None:
                        content = part
            except ParseError as exc:
                warnings.append(exc.message)
        if presentation is not None and content is None:
            try:
                content = canonicalize(derive_content(presentation))
            except ContentUnsupported:
                content = None
        body: dict = {
            "mathml": _math_markup(presentation) if presentation else "",
            "warnings": warnings,
        }
        if content is not None:
            body["content_mathml"] = _math_markup(content)
        return body

    @app.get("/api/explain")
    def api_explain(request: Request):
        doc_id = request.query_params.get("doc")
        if not doc_id:
            return _error(400, "missing-parameter", "doc is required")
        if snapshot.get_doc(doc_id) is None:
            return _error(404, "unknown-document", "no document %r" % doc_id)
        query, failure = parse_search_params(request)
        if failure is not None:
            return failure
        try:
            result = explain(query, doc_id, snapshot)
        except NotAMatch as exc:
            return _error(422, "not-a-match", str(exc))
        return {
            "doc": result.doc_id,
            "total": result.total,
            "beta": result.beta,
            "nodes": [
                {
                    "clause": node.clause,
                    "term": node.term,
                    "field": node.field,
                    "tf": node.tf,
                    "idf": node.idf,
                    "weight": node.weight,
                    "beta": node.beta,
                    "contribution": node.contribution,
                }
                for node in result.nodes
            ],
            "warnings": query.warnings,
        }

    # The path converter keeps percent-escaped ids (slashes included)
    # round-tripping instead of breaking route matching.
    @app.get("/api/doc/{doc_id:path}")
    def api_doc(doc_id: str):
        rec = snapshot.get_doc(doc_id)
        if rec is None:
            return _error(404, "unknown-document", "no document %r" % doc_id)
        return {
            "id": rec.id,
            "title": rec.title,
            "authors": list(rec.authors),
            "language": rec.language,
            "year": rec.year,
            "extracted_text": rec.extracted_text,
            "formulae": [
                {
                    "mathml": serialize_node(fs.formula.root),
                    "encoding": fs.formula.encoding,
                    "span": list(fs.span),
                }
                for fs in rec.formulae
            ],
        }

    @app.get("/opensearch.xml")
    def opensearch(request: Request):
        base = str(request.base_url).rstrip("/")
        html_template = "%s/search?q={searchTerms}&page={startPage?}" % base
        json_template = "%s/api/search?q={searchTerms}&page={startPage?}" % base
        document = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            '<OpenSearchDescription xmlns="http://a9.com/-/spec/opensearch/1.1/">\n'
            "  <ShortName>%s</ShortName>\n"
            "  <Description>%s</Description>\n"
            "  <Url type=\"text/html\" template=%s/>\n"
            "  <Url type=\"application/json\" rel=\"results\" template=%s/>\n"
            "</OpenSearchDescription>\n"
        ) % (
            escape(SHORT_NAME),
            escape(DESCRIPTION),
            quoteattr(html_template),
            quoteattr(json_template),
        )
        return Response(
            content=document,
            media_type="application/opensearchdescription+xml",
        )

    @app.get("/search")
    def search_page():
        if static_dir:
            index_page = os.path.join(static_dir, "index.html")
            if os.path.isfile(index_page):
                return FileResponse(index_page, media_type="text/html")
        return HTMLResponse(_FALLBACK_PAGE % {"name": SHORT_NAME})

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
