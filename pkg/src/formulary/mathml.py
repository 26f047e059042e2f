"""Formula AST plus a reader and writer for the supported MathML subset.

The AST is the single internal representation that every math source
(LaTeX queries, pasted MathML, document markup) converges to.  The element
vocabulary is closed: anything outside it is rejected at parse time so the
downstream normalization rules stay total.
"""

from __future__ import annotations

import xml.parsers.expat
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

PRESENTATION_ELEMENTS = frozenset({
    "mrow", "mi", "mn", "mo", "msup", "msub", "msubsup", "mfrac",
    "msqrt", "mroot", "mfenced", "mtext", "mspace", "mover", "munder",
    "munderover",
})
CONTENT_ELEMENTS = frozenset({
    "apply", "ci", "cn", "csymbol", "plus", "minus", "times", "divide",
    "power", "eq", "lt", "gt", "leq", "geq", "neq", "root",
})
STRUCTURAL_ELEMENTS = frozenset({"math", "semantics", "annotation-xml"})
VOCABULARY = PRESENTATION_ELEMENTS | CONTENT_ELEMENTS | STRUCTURAL_ELEMENTS

#: Elements that carry text and never carry element children.
LEAF_ELEMENTS = frozenset({"mi", "mn", "mo", "mtext", "ci", "cn"})

#: Content elements that act as operator heads inside an ``apply``.
CONTENT_OPERATORS = frozenset({
    "plus", "minus", "times", "divide", "power",
    "eq", "lt", "gt", "leq", "geq", "neq", "root", "csymbol",
})

PRESENTATION = "presentation"
CONTENT = "content"
MIXED = "mixed"
ENCODINGS = (PRESENTATION, CONTENT, MIXED)

SOURCE_LATEX = "latex"
SOURCE_DOCUMENT = "mathml-document"
SOURCE_QUERY = "mathml-query"

#: Reserved for unification placeholders; rejected in leaf text at parse.
RESERVED_CHAR = "§"

#: The only leaf texts allowed to use the reserved character, so unified
#: index terms stay reparseable while ordinary identifiers cannot collide.
PLACEHOLDER_TEXTS = ("§id", "§const")

_GREEK_NAMES = (
    "alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu nu "
    "xi omicron pi rho sigma tau upsilon phi chi psi omega"
).split()

#: Named character entities decoded at parse.  Numeric references are
#: handled by the XML layer itself; these are the operator and Greek names
#: the common MathML producers emit.
NAMED_ENTITIES: dict[str, str] = {
    "InvisibleTimes": "⁢",
    "it": "⁢",
    "ApplyFunction": "⁡",
    "af": "⁡",
    "minus": "−",
    "middot": "·",
    "centerdot": "·",
    "sdot": "⋅",
    "times": "×",
    "le": "≤",
    "leq": "≤",
    "ge": "≥",
    "geq": "≥",
    "ne": "≠",
    "neq": "≠",
    "plusmn": "±",
    "pm": "±",
    "infin": "∞",
    "infty": "∞",
}
for _i, _name in enumerate(_GREEK_NAMES):
    NAMED_ENTITIES[_name] = chr(0x03B1 + _i)
    # Capital Greek block has a gap before sigma (final sigma slot).
    _cap = 0x0391 + _i if _i < 17 else 0x0391 + _i + 1
    NAMED_ENTITIES[_name.capitalize()] = chr(_cap)


class ParseError(Exception):
    """MathML rejection with the character offset of the offending input."""

    def __init__(self, position: int, message: str):
        super().__init__(f"{message} (at offset {position})")
        self.position = position
        self.message = message


@dataclass(frozen=True)
class MathNode:
    """One element of a formula tree.

    Attributes are normalized to a name-sorted tuple of pairs (XML
    attribute order is insignificant), which makes structural equality
    and the serialize/parse round trip line up.
    """

    element: str
    text: str | None = None
    children: tuple[MathNode, ...] = ()
    attributes: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))
        attrs = self.attributes
        if isinstance(attrs, dict):
            attrs = attrs.items()
        object.__setattr__(self, "attributes", tuple(sorted(attrs)))

    @property
    def is_leaf(self) -> bool:
        return self.element in LEAF_ELEMENTS

    def attr(self, name: str, default: str | None = None) -> str | None:
        for key, value in self.attributes:
            if key == name:
                return value
        return default

    def with_children(self, children) -> MathNode:
        return MathNode(self.element, self.text, tuple(children), self.attributes)

    def iter_nodes(self):
        """Pre-order iteration over the subtree rooted here."""
        yield self
        for child in self.children:
            yield from child.iter_nodes()

    def __repr__(self):  # compact, for test failure output
        parts = [self.element]
        if self.text is not None:
            parts.append(repr(self.text))
        if self.children:
            parts.append("[%s]" % ", ".join(repr(c) for c in self.children))
        return "".join(parts)


@dataclass(frozen=True)
class Formula:
    """A rooted formula tree tagged with its encoding and origin."""

    root: MathNode
    encoding: str = PRESENTATION
    source: str = SOURCE_DOCUMENT


def _local_name(raw: str) -> str:
    """Strip a namespace prefix (``m:mi`` -> ``mi``)."""
    return raw.rsplit(":", 1)[-1]


def _entity_prologue() -> str:
    decls = "".join(
        '<!ENTITY %s "&#%d;">' % (name, ord(char))
        for name, char in NAMED_ENTITIES.items()
    )
    return "<!DOCTYPE math [%s]>" % decls


#: Internal DTD prepended before parsing so named entities resolve.
ENTITY_PROLOGUE = _entity_prologue()
_PROLOGUE = ENTITY_PROLOGUE


class _Frame:
    __slots__ = ("element", "attributes", "text_parts", "children", "position")

    def __init__(self, element, attributes, position):
        self.element = element
        self.attributes = attributes
        self.text_parts = []
        self.children = []
        self.position = position


class _Builder:
    """expat-driven AST builder tracking source offsets for errors."""

    def __init__(self, raw: bytes, prologue_bytes: int):
        self.raw = raw
        self.prologue_bytes = prologue_bytes
        self.parser = xml.parsers.expat.ParserCreate()
        self.parser.buffer_text = True
        self.parser.StartElementHandler = self._start
        self.parser.EndElementHandler = self._end
        self.parser.CharacterDataHandler = self._chars
        self.stack: list[_Frame] = []
        self.root: MathNode | None = None
        self.first_presentation: int | None = None
        self.first_content: int | None = None

    def char_offset(self, byte_index: int | None = None) -> int:
        """Map the parser's byte index into a character offset in the input."""
        if byte_index is None:
            byte_index = self.parser.CurrentByteIndex
        byte_index -= self.prologue_bytes
        byte_index = max(0, min(byte_index, len(self.raw)))
        return len(self.raw[:byte_index].decode("utf-8", "ignore"))

    def _start(self, name, attrs):
        position = self.char_offset()
        element = _local_name(name)
        if element not in VOCABULARY:
            raise ParseError(position, "unknown element <%s>" % element)
        if self.stack and self.stack[-1].element in LEAF_ELEMENTS:
            raise ParseError(
                position,
                "<%s> cannot contain element children" % self.stack[-1].element,
            )
        if element in PRESENTATION_ELEMENTS and self.first_presentation is None:
            self.first_presentation = position
        if element in CONTENT_ELEMENTS and self.first_content is None:
            self.first_content = position
        filtered = [
            (_local_name(key), value)
            for key, value in attrs.items()
            if key != "xmlns" and not key.startswith("xmlns:")
        ]
        self.stack.append(_Frame(element, filtered, position))

    def _chars(self, data):
        if self.stack:
            self.stack[-1].text_parts.append(data)

    def _end(self, name):
        frame = self.stack.pop()
        text = "".join(frame.text_parts)
        if frame.element in LEAF_ELEMENTS:
            if RESERVED_CHAR in text and text not in PLACEHOLDER_TEXTS:
                raise ParseError(
                    frame.position,
                    "reserved character %r in <%s> text" % (RESERVED_CHAR, frame.element),
                )
            node_text: str | None = text
        else:
            if text.strip():
                raise ParseError(
                    frame.position,
                    "text content inside non-leaf <%s>" % frame.element,
                )
            node_text = None
        node = MathNode(
            frame.element,
            text=node_text,
            children=tuple(frame.children),
            attributes=tuple(frame.attributes),
        )
        if self.stack:
            self.stack[-1].children.append(node)
        else:
            self.root = node


def _has_semantics_pair(root: MathNode) -> bool:
    for node in root.iter_nodes():
        if node.element == "semantics" and any(
            child.element == "annotation-xml" for child in node.children
        ):
            return True
    return False


def infer_encoding(root: MathNode) -> str:
    """Classify a tree by the vocabulary of its non-structural nodes.

    Raises ParseError when both vocabularies occur without a semantics
    pairing (offset 0: the conflict is a whole-tree property).
    """
    has_presentation = has_content = False
    for node in root.iter_nodes():
        if node.element in PRESENTATION_ELEMENTS:
            has_presentation = True
        elif node.element in CONTENT_ELEMENTS:
            has_content = True
    if has_presentation and has_content:
        if not _has_semantics_pair(root):
            raise ParseError(
                0, "mixed Presentation and Content markup without a semantics pair"
            )
        return MIXED
    if has_content:
        return CONTENT
    return PRESENTATION


def parse_mathml(xml_text: str, source: str = SOURCE_DOCUMENT) -> Formula:
    """Parse a MathML fragment into a Formula.

    Namespace prefixes and declarations are discarded, comments and
    processing instructions are dropped, whitespace-only text in non-leaf
    elements is ignored, and the named operator entities are decoded.

    Raises ParseError on malformed XML, elements outside the vocabulary,
    text inside non-leaf elements, or element children inside leaves.
    """
    raw = xml_text.encode("utf-8")
    prologue = _PROLOGUE.encode("utf-8")
    builder = _Builder(raw, len(prologue))
    try:
        builder.parser.Parse(prologue + raw, True)
    except xml.parsers.expat.ExpatError as exc:
        position = builder.char_offset(getattr(builder.parser, "ErrorByteIndex", 0))
        position = max(0, min(position, max(len(xml_text) - 1, 0)))
        raise ParseError(position, xml.parsers.expat.errors.messages[exc.code]) from None
    if builder.root is None:
        raise ParseError(0, "empty input")
    offending = builder.first_presentation, builder.first_content
    try:
        encoding = infer_encoding(builder.root)
    except ParseError:
        position = max(p for p in offending if p is not None)
        raise ParseError(
            position, "mixed Presentation and Content markup without a semantics pair"
        ) from None
    return Formula(builder.root, encoding=encoding, source=source)


def serialize_node(node: MathNode) -> str:
    """Deterministic single-line XML for one subtree.

    Attribute order is the node's stored (name-sorted) order; childless,
    textless elements use the self-closing form.
    """
    attrs = "".join(" %s=%s" % (k, quoteattr(v)) for k, v in node.attributes)
    body = escape(node.text or "") + "".join(
        serialize_node(child) for child in node.children
    )
    if not body:
        return "<%s%s/>" % (node.element, attrs)
    return "<%s%s>%s</%s>" % (node.element, attrs, body, node.element)


def serialize_mathml(formula: Formula) -> str:
    """Serialize a Formula to deterministic MathML text.

    Structurally equal formulae serialize to byte-identical strings, and
    ``parse_mathml(serialize_mathml(f))`` reproduces ``f``.
    """
    return serialize_node(formula.root)


def pretty_serialize(node: MathNode, indent: str = "  ") -> str:
    """Indented multi-line form for reports; leaves stay on one line."""
    lines: list[str] = []

    def emit(current: MathNode, depth: int):
        pad = indent * depth
        attrs = "".join(" %s=%s" % (k, quoteattr(v)) for k, v in current.attributes)
        if not current.children and not current.text:
            lines.append("%s<%s%s/>" % (pad, current.element, attrs))
        elif current.is_leaf:
            lines.append(
                "%s<%s%s>%s</%s>"
                % (pad, current.element, attrs, escape(current.text or ""), current.element)
            )
        else:
            lines.append("%s<%s%s>" % (pad, current.element, attrs))
            for child in current.children:
                emit(child, depth + 1)
            lines.append("%s</%s>" % (pad, current.element))

    emit(node, 0)
    return "\n".join(lines)
