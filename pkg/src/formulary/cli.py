"""Command line front end: build, search, normalize, serve.

Exit codes: 0 success, 1 usage error, 2 data error.  The FORMULARY_LOG
environment variable sets the logging level (DEBUG, INFO, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .canonical import canonicalize, generate_report
from .extract import ExtractError, extract
from .mathml import ParseError, parse_mathml, serialize_mathml
from .query import QueryError, execute, explain, parse_query
from .service import create_app
from .store import (
    DocumentRecord,
    IndexBuilder,
    StoreError,
    load,
)
from .tokenizer import WeightConfig

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_CONFIG_KEYS = {
    "level_factor": float,
    "var_unification_factor": float,
    "const_unification_factor": float,
    "math_weight": float,
    "snippet_window": int,
}


class DataError(Exception):
    """Unusable input data or index; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems by default; the CLI contract
    # reserves 2 for data errors, so remap usage to 1.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


def _positive_int(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError("%r is not an integer" % raw) from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _configure_logging() -> None:
    name = os.environ.get("FORMULARY_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_config(path: str) -> dict:
    """Flat key=value file for weights and scoring parameters."""
    values: dict = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataError("cannot read config: %s" % exc) from exc
    for lineno, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise DataError("%s line %d: expected key=value" % (path, lineno))
        key, _, raw_value = stripped.partition("=")
        key, raw_value = key.strip(), raw_value.strip()
        if key not in _CONFIG_KEYS:
            raise DataError("%s line %d: unknown key %r" % (path, lineno, key))
        try:
            values[key] = _CONFIG_KEYS[key](raw_value)
        except ValueError:
            raise DataError(
                "%s line %d: bad value for %s: %r" % (path, lineno, key, raw_value)
            ) from None
    return values


def _builder_from_config(config: dict) -> IndexBuilder:
    try:
        weights = WeightConfig(
            level_factor=config.get("level_factor", 0.7),
            var_unification_factor=config.get("var_unification_factor", 0.8),
            const_unification_factor=config.get("const_unification_factor", 0.8),
        )
    except ValueError as exc:
        raise DataError("bad weight configuration: %s" % exc) from exc
    return IndexBuilder(
        weights=weights,
        math_weight=config.get("math_weight", 1.0),
        snippet_window=config.get("snippet_window", 240),
    )


def _warn(message: str) -> None:
    print("warning: %s" % message, file=sys.stderr)


def cmd_build(args) -> int:
    config = _load_config(args.config) if args.config else {}
    builder = _builder_from_config(config)
    warning_count = 0
    try:
        corpus = open(args.corpus, encoding="utf-8")
    except OSError as exc:
        raise DataError("cannot read corpus: %s" % exc) from exc
    with corpus:
        for lineno, line in enumerate(corpus, 1):
            if not line.strip():
                continue
            where = "%s line %d" % (args.corpus, lineno)
            try:
                raw = json.loads(line)
                rec_id = raw["id"]
                result = extract(raw["body"])
                record = DocumentRecord(
                    id=rec_id,
                    title=raw["title"],
                    authors=tuple(raw["authors"]),
                    language=raw["language"],
                    year=raw["year"],
                    body=raw["body"],
                    extracted_text=result.text,
                    formulae=tuple(result.formulae),
                )
                builder.add_document(record)
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                warning_count += 1
                _warn("%s: unusable record (%s), skipped" % (where, exc))
                continue
            except (ExtractError, StoreError) as exc:
                warning_count += 1
                _warn("%s: %s, skipped" % (where, exc))
                continue
            for message in result.warnings:
                warning_count += 1
                _warn("%s: %s: %s" % (where, rec_id, message))
    if not builder.doc_count:
        raise DataError("no documents indexed from %s" % args.corpus)
    snapshot = builder.commit()
    snapshot.save(args.out)
    text_terms = sum(
        snapshot.term_count(f) for f in ("title", "author", "body")
    )
    print(
        "docs=%d terms=%d math_terms=%d warnings=%d"
        % (snapshot.doc_count, text_terms, snapshot.term_count("math"),
           warning_count)
    )
    return EXIT_OK


def _load_index(path: str):
    try:
        return load(path)
    except StoreError as exc:
        raise DataError(str(exc)) from exc


def cmd_search(args) -> int:
    snapshot = _load_index(args.index)
    try:
        query = parse_query(args.query)
    except QueryError as exc:
        raise DataError(str(exc)) from exc
    query.math_mode = args.math_mode
    for message in query.warnings:
        _warn(message)
    result = execute(query, snapshot, page=args.page)
    print("total=%d page=%d" % (result.total, args.page))
    rank = (args.page - 1) * 10
    for hit in result.hits:
        rank += 1
        rec = snapshot.get_doc(hit.doc_id)
        print("%d. %s  score=%.4f  %s" % (rank, hit.doc_id, hit.score, rec.title))
        if hit.snippet.text:
            print("   %s" % hit.snippet.text)
        if args.explain:
            breakdown = explain(query, hit.doc_id, snapshot)
            for node in breakdown.nodes:
                print(
                    "   %s [%s] tf=%.4f idf=%.4f w=%.3f beta=%.3f -> %.6f"
                    % (node.clause, node.field, node.tf, node.idf,
                       node.weight, node.beta, node.contribution)
                )
            print("   total=%.6f" % breakdown.total)
    return EXIT_OK


def cmd_normalize(args) -> int:
    try:
        with open(args.input, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataError("cannot read input: %s" % exc) from exc
    entries = []
    normalized = 0
    for lineno, line in enumerate(lines, 1):
        fragment = line.strip()
        if not fragment:
            continue
        try:
            before = parse_mathml(fragment)
            after = canonicalize(before)
        except ParseError as exc:
            _warn("line %d: %s" % (lineno, exc.message))
            continue
        normalized += 1
        print(serialize_mathml(after))
        entries.append({"label": "line %d" % lineno, "before": before,
                        "after": after})
    if not normalized:
        raise DataError("no fragments normalized from %s" % args.input)
    if args.report:
        try:
            with open(args.report, "w", encoding="utf-8") as fh:
                fh.write(generate_report(entries))
        except OSError as exc:
            raise DataError("cannot write report: %s" % exc) from exc
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    snapshot = _load_index(args.index)
    app = create_app(snapshot, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="formulary",
                     description="Math-aware full-text search engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="index a corpus file")
    p_build.add_argument("--corpus", required=True)
    p_build.add_argument("--out", required=True)
    p_build.add_argument("--config")
    p_build.set_defaults(func=cmd_build)

    p_search = sub.add_parser("search", help="query an index")
    p_search.add_argument("--index", required=True)
    p_search.add_argument("--query", required=True)
    p_search.add_argument("--math-mode", choices=("pmml", "cmml", "both"),
                          default="both")
    p_search.add_argument("--page", type=_positive_int, default=1)
    p_search.add_argument("--explain", action="store_true")
    p_search.set_defaults(func=cmd_search)

    p_norm = sub.add_parser("normalize",
                            help="canonicalize MathML fragments, one per line")
    p_norm.add_argument("--in", dest="input", required=True)
    p_norm.add_argument("--report")
    p_norm.set_defaults(func=cmd_normalize)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--index", required=True)
    p_serve.add_argument("--port", type=_positive_int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--static", help="directory of UI assets to serve at /")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
