"""Math-aware search engine.

Parses LaTeX and MathML into a shared formula representation,
canonicalizes notation, indexes weighted subformula terms alongside
document text, and answers mixed text+math queries with explainable
tf-idf scores over HTTP or the command line.
"""

from .analyzer import tokenize_text, tokenize_text_with_offsets
from .canonical import (
    CanonicalizationConfig,
    canonicalize,
    generate_report,
    split_encodings,
)
from .extract import ExtractError, ExtractResult, extract
from .latex import ContentUnsupported, LatexError, derive_content, parse_latex
from .mathml import (
    CONTENT,
    Formula,
    MathNode,
    MIXED,
    ParseError,
    PRESENTATION,
    infer_encoding,
    parse_mathml,
    serialize_mathml,
)
from .query import (
    MathClause,
    NotAMatch,
    Query,
    QueryError,
    TextClause,
    execute,
    explain,
    parse_query,
    suggest,
)
from .service import create_app
from .store import (
    DocumentRecord,
    DuplicateIdError,
    FormatVersionMismatch,
    FormulaSpan,
    IndexBuilder,
    IndexIOError,
    IndexSnapshot,
    InvalidRecordError,
    StoreError,
    UnknownFacetFieldError,
    load,
)
from .tokenizer import (
    DEFAULT_WEIGHTS,
    MathTerm,
    WeightConfig,
    extract_subformulae,
    tokenize_formula,
    unify,
)

__version__ = "0.1.0"

__all__ = [
    "CONTENT",
    "CanonicalizationConfig",
    "ContentUnsupported",
    "DEFAULT_WEIGHTS",
    "DocumentRecord",
    "DuplicateIdError",
    "ExtractError",
    "ExtractResult",
    "Formula",
    "FormulaSpan",
    "FormatVersionMismatch",
    "IndexBuilder",
    "IndexIOError",
    "IndexSnapshot",
    "InvalidRecordError",
    "LatexError",
    "MIXED",
    "MathClause",
    "MathNode",
    "MathTerm",
    "NotAMatch",
    "PRESENTATION",
    "ParseError",
    "Query",
    "QueryError",
    "StoreError",
    "TextClause",
    "UnknownFacetFieldError",
    "WeightConfig",
    "canonicalize",
    "create_app",
    "derive_content",
    "execute",
    "explain",
    "extract",
    "extract_subformulae",
    "generate_report",
    "infer_encoding",
    "load",
    "parse_latex",
    "parse_mathml",
    "parse_query",
    "serialize_mathml",
    "split_encodings",
    "suggest",
    "tokenize_formula",
    "tokenize_text",
    "tokenize_text_with_offsets",
    "unify",
    "__version__",
]
