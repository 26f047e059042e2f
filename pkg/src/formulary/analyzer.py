"""Text analysis shared by indexing, query parsing, and snippets."""

from __future__ import annotations

import re

# Alphanumeric runs, Unicode-aware, underscore excluded.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

MIN_TOKEN_LENGTH = 2


def tokenize_text(text: str) -> list[str]:
    """Lowercased alphanumeric tokens of length >= 2, in order."""
    return [t for t, _, _ in tokenize_text_with_offsets(text)]


def tokenize_text_with_offsets(text: str) -> list[tuple[str, int, int]]:
    """Tokens with [start, end) character offsets into the input.

    Offsets index the original text; lowercasing happens per token so
    length-changing case folds cannot shift spans.
    """
    out = []
    for match in _TOKEN_RE.finditer(text):
        if match.end() - match.start() >= MIN_TOKEN_LENGTH:
            out.append((match.group().lower(), match.start(), match.end()))
    return out


def tokenize_outside_spans(
    text: str, blocked: list[tuple[int, int]]
) -> list[tuple[str, int, int]]:
    """Tokens that do not overlap any blocked [start, end) span.

    Used to keep formula placeholder fragments out of the text index.
    """
    out = []
    for token, start, end in tokenize_text_with_offsets(text):
        if any(start < b_end and end > b_start for b_start, b_end in blocked):
            continue
        out.append((token, start, end))
    return out
