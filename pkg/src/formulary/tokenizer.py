"""Expansion of canonical Formulae into weighted, unified index terms.

Every non-excluded subtree of a formula becomes a searchable term, in up
to four variants: the exact serialization, one with identifiers replaced
by a placeholder, one with numeric constants replaced, and one with both.
Weights decay multiplicatively with subtree depth and unification, so a
document holding the exact query formula always outscores one holding a
renamed or shallower variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .canonical import split_encodings
from .mathml import (
    CONTENT_OPERATORS,
    Formula,
    MathNode,
    PLACEHOLDER_TEXTS,
    PRESENTATION,
    serialize_node,
)

VARIANT_EXACT = "exact"
VARIANT_VAR = "var_unified"
VARIANT_CONST = "const_unified"
VARIANT_BOTH = "both_unified"

#: Leaf texts substituted by unification; no other parsed text may use `§`.
ID_PLACEHOLDER, CONST_PLACEHOLDER = PLACEHOLDER_TEXTS

PRESENTATION_PREFIX = "P:"
CONTENT_PREFIX = "C:"

_IDENTIFIER_LEAVES = frozenset({"mi", "ci"})
_CONSTANT_LEAVES = frozenset({"mn", "cn"})
_WRAPPERS = frozenset({"math", "mrow"})


@dataclass(frozen=True)
class WeightConfig:
    """Depth and unification decay factors.

    level_factor scales each extra level of subtree depth; the two
    unification factors price the precision lost by placeholder matching.
    """

    level_factor: float = 0.7
    var_unification_factor: float = 0.8
    const_unification_factor: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.level_factor <= 1.0:
            raise ValueError("level_factor must be in (0, 1]")
        for name in ("var_unification_factor", "const_unification_factor"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError("%s must be in (0, 1)" % name)


DEFAULT_WEIGHTS = WeightConfig()


@dataclass(frozen=True)
class MathTerm:
    """One weighted index term.

    token: `P:`- or `C:`-prefixed deterministic serialization of the
    subtree; depth: level of the subtree root (0 = whole formula);
    variant: which unification produced the token.  The weight of an
    unmerged term lies in (0, 1]; merged duplicates carry the sum of
    their constituents and may exceed 1 (they act as frequencies).
    """

    token: str
    depth: int
    variant: str
    weight: float


class Subformula(NamedTuple):
    subtree: MathNode
    depth: int


def _is_excluded(node: MathNode) -> bool:
    # Lone operators and annotation text carry no searchable structure; a
    # math/mrow wrapper around a single listed child duplicates its token.
    if node.element in ("mo", "mtext"):
        return True
    if node.element in CONTENT_OPERATORS:
        return True
    if (
        node.element in _WRAPPERS
        and len(node.children) == 1
        and not _is_excluded(node.children[0])
    ):
        return True
    return False


def _walk(node: MathNode, depth: int) -> Iterator[Subformula]:
    if not _is_excluded(node):
        yield Subformula(node, depth)
    for child in node.children:
        yield from _walk(child, depth + 1)


def extract_subformulae(f: Formula | MathNode) -> list[Subformula]:
    """All indexable subtrees with their depths, in pre-order."""
    root = f.root if isinstance(f, Formula) else f
    return list(_walk(root, 0))


def unify(subtree: MathNode, mode: str) -> MathNode:
    """Replace leaf texts with placeholders; structure is untouched.

    mode: `variables` rewrites mi/ci texts, `constants` rewrites mn/cn
    texts, `both` does both.  Idempotent.
    """
    if mode not in ("variables", "constants", "both"):
        raise ValueError("unknown unification mode %r" % mode)
    ids = mode in ("variables", "both")
    consts = mode in ("constants", "both")

    def rewrite(node: MathNode) -> MathNode:
        text = node.text
        if ids and node.element in _IDENTIFIER_LEAVES:
            text = ID_PLACEHOLDER
        if consts and node.element in _CONSTANT_LEAVES:
            text = CONST_PLACEHOLDER
        children = tuple(rewrite(c) for c in node.children)
        if text == node.text and children == node.children:
            return node
        return MathNode(node.element, text, children, node.attributes)

    return rewrite(subtree)


def _tokenize_tree(
    root: MathNode,
    prefix: str,
    cfg: WeightConfig,
    merged: dict[str, MathTerm],
) -> None:
    l = cfg.level_factor
    u_v = cfg.var_unification_factor
    u_c = cfg.const_unification_factor
    for subtree, depth in _walk(root, 0):
        base = l ** depth
        exact = prefix + serialize_node(subtree)
        variants = [(exact, VARIANT_EXACT, base)]
        varied = prefix + serialize_node(unify(subtree, "variables"))
        if varied != exact:
            variants.append((varied, VARIANT_VAR, base * u_v))
        consted = prefix + serialize_node(unify(subtree, "constants"))
        if consted != exact:
            variants.append((consted, VARIANT_CONST, base * u_c))
        both = prefix + serialize_node(unify(subtree, "both"))
        if both not in (exact, varied, consted):
            variants.append((both, VARIANT_BOTH, base * u_v * u_c))
        for token, variant, weight in variants:
            prior = merged.get(token)
            if prior is None:
                merged[token] = MathTerm(token, depth, variant, weight)
            else:
                # Duplicates merge by weight sum; depth/variant of the
                # first (shallowest pre-order) occurrence are kept.
                merged[token] = MathTerm(
                    prior.token, prior.depth, prior.variant, prior.weight + weight
                )


def token_prefix(encoding: str) -> str:
    return PRESENTATION_PREFIX if encoding == PRESENTATION else CONTENT_PREFIX


def tokenize_formula(f: Formula, cfg: WeightConfig | None = None) -> list[MathTerm]:
    """Expand a canonical Formula into its weighted term list.

    Single-encoding input is tokenized directly with the matching token
    prefix.  A mixed Formula (semantics pair) is split first and both
    encodings contribute terms.  Duplicate tokens within one formula are
    merged by summing weights; emission order is first occurrence.
    """
    cfg = cfg or DEFAULT_WEIGHTS
    parts = split_encodings(f) if f.encoding == "mixed" else [f]
    merged: dict[str, MathTerm] = {}
    for part in parts:
        _tokenize_tree(part.root, token_prefix(part.encoding), cfg, merged)
    return list(merged.values())
