"""Normalization rules that fold equivalent MathML spellings into one form.

Different producers emit structurally different markup for the same
formula: redundant mrow nesting, mfenced versus literal fence operators,
styling attributes, invisible multiplication operators, msubsup versus
stacked scripts.  Indexing and matching happen on the canonical form, so
all of those dialects collide onto identical index terms.

Rule inventory (each independently toggleable):
  R1 mrow-flatten     splice nested mrows, drop single-child mrow wrappers
  R2 attribute-strip  remove attributes outside the whitelist
  R3 mfenced-expand   rewrite mfenced into mrow with explicit fence/separator mo
  R4 operator-normalize  fold operator glyph variants, drop invisible products
  R5 whitespace-scrub trim leaf text, drop mspace and empty mtext
  R6 semantics-split  unwrap single-child semantics wrappers
  R7 script-normalize rewrite msubsup(b, sub, sup) to msup(msub(b, sub), sup)
"""

from __future__ import annotations

import html
from dataclasses import dataclass

from .mathml import (
    Formula,
    MathNode,
    ParseError,
    infer_encoding,
    pretty_serialize,
    serialize_node,
)

ALL_RULES = frozenset({"R1", "R2", "R3", "R4", "R5", "R6", "R7"})

#: mo texts folded to a single code point.
_OPERATOR_FOLD = {"-": "−"}

#: mo texts deleted outright when they sit between two operands: `*`,
#: invisible times, middle dot.  Explicit glyphs × and ⋅ are kept.
_INVISIBLE_PRODUCTS = {"*", "⁢", "·"}

_MFENCED_DEFAULTS = {"open": "(", "close": ")", "separators": ","}


@dataclass(frozen=True)
class CanonicalizationConfig:
    """Which rules run and which attributes survive R2.

    Whitelist entries are either a bare attribute name (kept everywhere)
    or ``element:name`` (kept on that element only).  The default keeps
    nothing except `encoding` on annotation-xml, which downstream code
    needs to recognize Content annotations.
    """

    rules_enabled: frozenset[str] = ALL_RULES
    attribute_whitelist: frozenset[str] = frozenset({"annotation-xml:encoding"})

    def __post_init__(self):
        object.__setattr__(self, "rules_enabled", frozenset(self.rules_enabled))
        object.__setattr__(
            self, "attribute_whitelist", frozenset(self.attribute_whitelist)
        )
        unknown = self.rules_enabled - ALL_RULES
        if unknown:
            raise ValueError("unknown rules: %s" % ", ".join(sorted(unknown)))

    def keeps(self, element: str, name: str) -> bool:
        return (
            name in self.attribute_whitelist
            or "%s:%s" % (element, name) in self.attribute_whitelist
        )


DEFAULT_CONFIG = CanonicalizationConfig()


def _expand_mfenced(node: MathNode) -> MathNode:
    # R3.  Attribute values come from the pre-R2 node, defaults per MathML.
    opening = node.attr("open", _MFENCED_DEFAULTS["open"]).strip()
    closing = node.attr("close", _MFENCED_DEFAULTS["close"]).strip()
    separators = [c for c in node.attr("separators", ",") if not c.isspace()]
    children: list[MathNode] = []
    if opening:
        children.append(MathNode("mo", opening))
    for i, child in enumerate(node.children):
        if i > 0 and separators:
            sep = separators[min(i - 1, len(separators) - 1)]
            children.append(MathNode("mo", sep))
        children.append(child)
    if closing:
        children.append(MathNode("mo", closing))
    return MathNode("mrow", None, tuple(children))


def _strip_invisible_products(children: list[MathNode]) -> list[MathNode]:
    # R4 removal step: an invisible/star product mo is dropped only when
    # flanked on both sides by non-mo siblings (real operands).
    kept: list[MathNode] = []
    for i, child in enumerate(children):
        if (
            child.element == "mo"
            and child.text in _INVISIBLE_PRODUCTS
            and 0 < i < len(children) - 1
            and children[i - 1].element != "mo"
            and children[i + 1].element != "mo"
        ):
            continue
        kept.append(child)
    return kept


def _rewrite(node: MathNode, cfg: CanonicalizationConfig) -> MathNode | None:
    """One bottom-up pass.  Returns None when the node is scrubbed away."""
    on = cfg.rules_enabled.__contains__

    children: list[MathNode] = []
    for child in node.children:
        result = _rewrite(child, cfg)
        if result is not None:
            children.append(result)
    element, text, attributes = node.element, node.text, node.attributes

    if on("R3") and element == "mfenced":
        expanded = _expand_mfenced(MathNode(element, text, tuple(children), attributes))
        element, text = expanded.element, expanded.text
        children = list(expanded.children)
        attributes = expanded.attributes

    if on("R2"):
        attributes = tuple(
            (name, value) for name, value in attributes if cfg.keeps(element, name)
        )

    if on("R5"):
        if element == "mspace":
            return None
        if text is not None:
            text = text.strip()
        if element == "mtext" and not text:
            return None

    if on("R4") and element == "mo" and text in _OPERATOR_FOLD:
        text = _OPERATOR_FOLD[text]

    if on("R7") and element == "msubsup" and len(children) == 3:
        base, sub, sup = children
        element = "msup"
        children = [MathNode("msub", None, (base, sub)), sup]

    if on("R6") and element == "semantics" and len(children) == 1:
        return children[0]

    if element == "mrow":
        if on("R1"):
            spliced: list[MathNode] = []
            for child in children:
                if child.element == "mrow":
                    spliced.extend(child.children)
                else:
                    spliced.append(child)
            children = spliced
        if on("R4"):
            children = _strip_invisible_products(children)
        if on("R1") and len(children) == 1:
            return children[0]
    elif on("R4"):
        children = _strip_invisible_products(children)

    return MathNode(element, text, tuple(children), attributes)


def _converge(root: MathNode, cfg: CanonicalizationConfig) -> tuple[MathNode, int]:
    """Apply passes until a fixpoint; returns (tree, passes including check)."""
    passes = 0
    while True:
        passes += 1
        rewritten = _rewrite(root, cfg)
        if rewritten is None:
            # Scrub rules never delete the root; keep the last surviving form.
            return root, passes
        if rewritten == root:
            return root, passes
        root = rewritten


def canonicalize(f: Formula, cfg: CanonicalizationConfig | None = None) -> Formula:
    """Rewrite a Formula to its canonical fixpoint.

    Total on valid Formulae; reapplying yields a structurally equal tree.
    The encoding tag is re-inferred because R6 can unwrap a mixed tree down
    to a single encoding.
    """
    cfg = cfg or DEFAULT_CONFIG
    root, _ = _converge(f.root, cfg)
    try:
        encoding = infer_encoding(root)
    except ParseError:
        encoding = f.encoding
    return Formula(root, encoding=encoding, source=f.source)


def _wrap_math(node: MathNode) -> str:
    serialized = serialize_node(node)
    if node.element == "math":
        return serialized
    return "<math>%s</math>" % serialized


def split_encodings(f: Formula) -> list[Formula]:
    """Break a canonical Formula into its independently indexable parts.

    A `math` wrapper is transparent: a single child stands alone, several
    children become the inferred mrow.  A root-level semantics pair yields
    one presentation Formula plus one content Formula per annotation-xml
    child, all sharing the original source tag.  Anything else passes
    through unchanged.  Parts whose vocabulary cannot be classified
    (malformed annotations) are dropped.
    """
    node = f.root
    if node.element == "math":
        if len(node.children) == 1:
            node = node.children[0]
        elif node.children:
            wrapped = Formula(MathNode("mrow", None, node.children), source=f.source)
            node = canonicalize(wrapped).root
        else:
            return []

    roots: list[MathNode] = []
    if node.element == "semantics":
        for child in node.children:
            if child.element == "annotation-xml":
                if len(child.children) == 1:
                    roots.append(child.children[0])
            elif not roots:
                roots.append(child)
    else:
        roots.append(node)

    parts: list[Formula] = []
    for root in roots:
        try:
            encoding = infer_encoding(root)
        except ParseError:
            continue
        parts.append(Formula(root, encoding=encoding, source=f.source))
    return parts


_REPORT_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Canonicalization report</title>
<style>
body {{ font-family: sans-serif; margin: 2rem; }}
section {{ border-bottom: 1px solid #ccc; padding: 1rem 0; }}
.pair {{ display: flex; gap: 2rem; }}
.pair > div {{ flex: 1; }}
pre {{ background: #f6f6f6; padding: .6rem; overflow-x: auto; }}
.rendered {{ border: 1px dashed #aaa; padding: .6rem; }}
</style>
</head>
<body>
<h1>Canonicalization report</h1>
{sections}
</body>
</html>
"""

_SECTION_TEMPLATE = """<section>
<h2>{label}</h2>
<div class="pair">
<div>
<h3>Before</h3>
<pre><code>{before_src}</code></pre>
<div class="rendered">{before_math}</div>
</div>
<div>
<h3>After</h3>
<pre><code>{after_src}</code></pre>
<div class="rendered">{after_math}</div>
</div>
</div>
</section>"""


def generate_report(entries: list[dict]) -> str:
    """Render before/after pairs as a self-contained HTML document.

    Each entry is {label, before: Formula, after: Formula}.  The source is
    shown escaped and pretty-printed; both trees are also embedded as live
    MathML for browsers that render it.  Raises ValueError on an empty list.
    """
    if not entries:
        raise ValueError("report requires at least one entry")
    sections = []
    for entry in entries:
        before, after = entry["before"], entry["after"]
        sections.append(
            _SECTION_TEMPLATE.format(
                label=html.escape(str(entry["label"])),
                before_src=html.escape(pretty_serialize(before.root)),
                after_src=html.escape(pretty_serialize(after.root)),
                before_math=_wrap_math(before.root),
                after_math=_wrap_math(after.root),
            )
        )
    return _REPORT_TEMPLATE.format(sections="\n".join(sections))
