"""Text and formula extraction from XHTML bodies with embedded MathML.

The body is walked once: character data accumulates into a normalized
text stream, and every `math` element is replaced by a placeholder token
whose span becomes the formula's anchor for snippets and highlighting.
Formulae are canonicalized and, when they carry a semantics pair, split
into one presentation and one content Formula sharing the placeholder.

A malformed body is an ExtractError (the caller skips the document); a
bad formula inside a well-formed body is skipped with a warning so one
broken converter output cannot sink the whole document.
"""

from __future__ import annotations

import re
import xml.parsers.expat
from dataclasses import dataclass, field

from .canonical import canonicalize, split_encodings
from .mathml import (
    ENTITY_PROLOGUE,
    Formula,
    LEAF_ELEMENTS,
    MathNode,
    ParseError,
    RESERVED_CHAR,
    SOURCE_DOCUMENT,
    VOCABULARY,
    infer_encoding,
)
from .store import FormulaSpan

_WRAPPER = "extraction-root"
_WS_RUN = re.compile(r"\s+")


class ExtractError(Exception):
    """The body itself cannot be processed (malformed XML)."""

    def __init__(self, message: str, path: str = ""):
        location = " at %s" % path if path else ""
        super().__init__(message + location)
        self.message = message
        self.path = path


@dataclass
class ExtractResult:
    text: str
    formulae: list[FormulaSpan] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _local(name: str) -> str:
    return name.rsplit(":", 1)[-1]


class _MathFrame:
    __slots__ = ("element", "attributes", "text_parts", "children")

    def __init__(self, element: str, attributes: list[tuple[str, str]]):
        self.element = element
        self.attributes = attributes
        self.text_parts: list[str] = []
        self.children: list[MathNode] = []


class _MathCapture:
    """Tolerant MathML builder: failures mark the capture, never raise."""

    def __init__(self, path: str):
        self.path = path
        self.depth = 0
        self.failure: str | None = None
        self.stack: list[_MathFrame] = []
        self.root: MathNode | None = None

    def fail(self, message: str) -> None:
        if self.failure is None:
            self.failure = message

    def start(self, name: str, attrs: dict[str, str]) -> None:
        self.depth += 1
        element = _local(name)
        if element not in VOCABULARY:
            self.fail("unknown element <%s>" % element)
        elif self.stack and self.stack[-1].element in LEAF_ELEMENTS:
            self.fail("<%s> cannot contain element children" % self.stack[-1].element)
        if self.failure is not None:
            return
        filtered = [
            (_local(key), value)
            for key, value in attrs.items()
            if key != "xmlns" and not key.startswith("xmlns:")
        ]
        self.stack.append(_MathFrame(element, filtered))

    def chars(self, data: str) -> None:
        if self.failure is None and self.stack:
            self.stack[-1].text_parts.append(data)

    def end(self) -> bool:
        """Close one element; True when the outer math element closed."""
        self.depth -= 1
        if self.failure is None:
            frame = self.stack.pop()
            text = "".join(frame.text_parts)
            if frame.element in LEAF_ELEMENTS:
                if RESERVED_CHAR in text:
                    self.fail("reserved character %r in leaf text" % RESERVED_CHAR)
                node_text: str | None = text
            else:
                if text.strip():
                    self.fail("text content inside non-leaf <%s>" % frame.element)
                node_text = None
            if self.failure is None:
                node = MathNode(
                    frame.element, node_text, tuple(frame.children),
                    tuple(frame.attributes),
                )
                if self.stack:
                    self.stack[-1].children.append(node)
                else:
                    self.root = node
        return self.depth == 0


class _Extractor:
    def __init__(self):
        self.parts: list[str] = []
        self.length = 0
        self.formulae: list[FormulaSpan] = []
        self.warnings: list[str] = []
        self.emitted = 0
        self.capture: _MathCapture | None = None
        # Per level: (element name, its 1-based index among same-named
        # siblings, counters for its children).  Level 0 is the wrapper.
        self.path_stack: list[tuple[str, int, dict[str, int]]] = [("", 0, {})]

    def _path(self) -> str:
        return "/".join(
            "%s[%d]" % (name, index) for name, index, _ in self.path_stack[1:]
        )

    def _append_text(self, data: str) -> None:
        collapsed = _WS_RUN.sub(" ", data)
        if collapsed.startswith(" ") and (
            self.length == 0 or (self.parts and self.parts[-1].endswith(" "))
        ):
            collapsed = collapsed[1:]
        if collapsed:
            self.parts.append(collapsed)
            self.length += len(collapsed)

    def _finish_math(self, capture: _MathCapture) -> None:
        if capture.failure is not None:
            self.warnings.append("%s: %s" % (capture.path, capture.failure))
            return
        root = capture.root
        assert root is not None
        try:
            encoding = infer_encoding(root)
        except ParseError as exc:
            self.warnings.append("%s: %s" % (capture.path, exc.message))
            return
        canonical = canonicalize(Formula(root, encoding, SOURCE_DOCUMENT))
        parts = split_encodings(canonical)
        if not parts:
            self.warnings.append("%s: empty math element" % capture.path)
            return
        placeholder = "⟦f#%d⟧" % self.emitted
        self.emitted += 1
        start = self.length
        self.parts.append(placeholder)
        self.length += len(placeholder)
        span = (start, start + len(placeholder))
        for part in parts:
            self.formulae.append(FormulaSpan(part, span))

    # -- expat handlers ------------------------------------------------------

    def start_element(self, name: str, attrs: dict[str, str]) -> None:
        if self.capture is not None:
            self.capture.start(name, attrs)
            return
        element = _local(name)
        if element == _WRAPPER and len(self.path_stack) == 1:
            return
        counters = self.path_stack[-1][2]
        counters[element] = counters.get(element, 0) + 1
        self.path_stack.append((element, counters[element], {}))
        if element == "math":
            self.capture = _MathCapture(self._path())
            self.capture.start(name, attrs)

    def end_element(self, name: str) -> None:
        if self.capture is not None:
            if self.capture.end():
                self._finish_math(self.capture)
                self.capture = None
                self.path_stack.pop()
            return
        if _local(name) == _WRAPPER and len(self.path_stack) == 1:
            return
        self.path_stack.pop()

    def char_data(self, data: str) -> None:
        if self.capture is not None:
            self.capture.chars(data)
        else:
            self._append_text(data)


def extract(body: str) -> ExtractResult:
    """Pull the text stream and canonical formulae out of an XHTML body.

    Returns ExtractResult(text, formulae, warnings); raises ExtractError
    when the body is not well-formed XML.
    """
    extractor = _Extractor()
    parser = xml.parsers.expat.ParserCreate()
    parser.buffer_text = True
    parser.StartElementHandler = extractor.start_element
    parser.EndElementHandler = extractor.end_element
    parser.CharacterDataHandler = extractor.char_data
    document = "%s<%s>%s</%s>" % (ENTITY_PROLOGUE, _WRAPPER, body, _WRAPPER)
    try:
        parser.Parse(document.encode("utf-8"), True)
    except xml.parsers.expat.ExpatError as exc:
        raise ExtractError(
            "body is not well-formed XML: %s"
            % xml.parsers.expat.errors.messages[exc.code],
            extractor._path(),
        ) from None
    text = "".join(extractor.parts).rstrip()
    return ExtractResult(text, extractor.formulae, extractor.warnings)
