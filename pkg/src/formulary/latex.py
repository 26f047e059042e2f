"""LaTeX math subset parser and best-effort Content MathML derivation.

The parser is total: any string yields either a presentation Formula or a
LatexError carrying the offset of the offending token.  The supported
subset is a deliberate closed list (identifiers, numbers, basic operators,
scripts, fractions, roots, fences, a command table of named operators,
functions and Greek letters); everything else is rejected with a message
naming the construct, which is what the query warning path surfaces.

`derive_content` translates the arithmetic/relational fragment of a
presentation tree into Content markup so both encodings can be indexed
from a single input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .mathml import CONTENT, Formula, MathNode, PRESENTATION, SOURCE_LATEX


class LatexError(Exception):
    """Rejection of a LaTeX input at a 0-based character offset."""

    def __init__(self, position: int, message: str):
        super().__init__(f"{message} (at offset {position})")
        self.position = position
        self.message = message


class ContentUnsupported(Exception):
    """The tree contains constructs outside the derivable fragment."""


_GREEK = {
    "alpha": "α", "beta": "β", "gamma": "γ", "delta": "δ",
    "epsilon": "ϵ", "varepsilon": "ε", "zeta": "ζ",
    "eta": "η", "theta": "θ", "vartheta": "ϑ",
    "iota": "ι", "kappa": "κ", "lambda": "λ", "mu": "μ",
    "nu": "ν", "xi": "ξ", "pi": "π", "varpi": "ϖ",
    "rho": "ρ", "varrho": "ϱ", "sigma": "σ",
    "varsigma": "ς", "tau": "τ", "upsilon": "υ",
    "phi": "ϕ", "varphi": "φ", "chi": "χ", "psi": "ψ",
    "omega": "ω",
    "Gamma": "Γ", "Delta": "Δ", "Theta": "Θ",
    "Lambda": "Λ", "Xi": "Ξ", "Pi": "Π", "Sigma": "Σ",
    "Upsilon": "Υ", "Phi": "Φ", "Psi": "Ψ", "Omega": "Ω",
}

_MO_COMMANDS = {
    "cdot": "⋅", "times": "×", "pm": "±",
    "leq": "≤", "geq": "≥", "neq": "≠",
    "sum": "∑", "int": "∫", "prod": "∏",
}

#: Function-name commands rendered as multi-letter identifiers.
_FUNCTION_COMMANDS = ("sin", "cos", "tan", "log", "ln", "exp", "lim")

_MI_COMMANDS = {"infty": "∞", **_GREEK}
_MI_COMMANDS.update({name: name for name in _FUNCTION_COMMANDS})

#: Commands whose scripts render under/over the symbol instead of sub/sup.
_MOVABLE_LIMITS = {"sum", "prod", "lim"}

#: Single-character operators accepted verbatim; '-' folds to U+2212 so the
#: parser already emits the canonical code point.
_OPERATOR_TRANSLATION = {c: c for c in "+*/=<>()[]|,."}
_OPERATOR_TRANSLATION["-"] = "−"

_FENCE_DELIMS = {"(", ")", "[", "]", "|"}

_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?|\.\d+")


@dataclass(frozen=True)
class _Tok:
    kind: str  # letter | number | op | caret | underscore | lbrace | rbrace | command | end
    value: str
    pos: int


def _lex(src: str) -> list[_Tok]:
    tokens: list[_Tok] = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isascii() and ch.isalpha():
            tokens.append(_Tok("letter", ch, i))
            i += 1
            continue
        number = _NUMBER_RE.match(src, i)
        if number and (ch.isdigit() or (ch == "." and number.group())):
            tokens.append(_Tok("number", number.group(), i))
            i = number.end()
            continue
        if ch == "\\":
            name = re.match(r"[A-Za-z]+", src[i + 1:])
            if not name:
                raise LatexError(i, "lone backslash")
            tokens.append(_Tok("command", name.group(), i))
            i += 1 + name.end()
            continue
        if ch == "^":
            tokens.append(_Tok("caret", ch, i))
        elif ch == "_":
            tokens.append(_Tok("underscore", ch, i))
        elif ch == "{":
            tokens.append(_Tok("lbrace", ch, i))
        elif ch == "}":
            tokens.append(_Tok("rbrace", ch, i))
        elif ch in _OPERATOR_TRANSLATION:
            tokens.append(_Tok("op", _OPERATOR_TRANSLATION[ch], i))
        else:
            raise LatexError(i, "unexpected character %r" % ch)
        i += 1
    tokens.append(_Tok("end", "", max(n - 1, 0)))
    return tokens


def _marker(tok: _Tok) -> str | None:
    """Terminator classification used by nested sequence parsing."""
    if tok.kind == "end":
        return "END"
    if tok.kind == "rbrace":
        return "RBRACE"
    if tok.kind == "op" and tok.value == ")":
        return "RPAREN"
    if tok.kind == "op" and tok.value == "]":
        return "RBRACKET"
    if tok.kind == "command" and tok.value == "right":
        return "RIGHT"
    return None


class _Parser:
    def __init__(self, tokens: list[_Tok]):
        self.tokens = tokens
        self.i = 0
        # Script bookkeeping, keyed by node identity: which sequence items
        # were built by a single _ or ^ (so the other script can merge into
        # msubsup/munderover) and which atoms take under/over scripts.
        self._script_origin: dict[int, tuple[str, MathNode, MathNode, bool]] = {}
        self._movable: set[int] = set()

    def peek(self) -> _Tok:
        return self.tokens[self.i]

    def take(self) -> _Tok:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    # -- sequences ---------------------------------------------------------

    def parse_sequence(self, stop: frozenset[str]) -> list[MathNode]:
        items: list[MathNode] = []
        while True:
            tok = self.peek()
            mark = _marker(tok)
            if mark in stop or mark == "END":
                return items
            if tok.kind in ("caret", "underscore"):
                self._attach_script(items, tok)
            elif tok.kind == "op" and tok.value == "(":
                items.append(self._parse_paren_or_mo())
            else:
                items.append(self.parse_atom())

    def _attach_script(self, items: list[MathNode], tok: _Tok):
        self.take()
        name = "^" if tok.kind == "caret" else "_"
        if not items:
            raise LatexError(tok.pos, "dangling '%s' without a base" % name)
        operand = self.parse_atom(expected="script argument after '%s'" % name)
        base = items.pop()
        origin = self._script_origin.get(id(base))
        new_kind = "sup" if tok.kind == "caret" else "sub"
        if origin is not None and origin[0] != new_kind:
            # msub picking up a ^ (or msup picking up a _) merges into one
            # three-slot script node.
            _, inner_base, first_script, movable = origin
            sub = first_script if origin[0] == "sub" else operand
            sup = operand if origin[0] == "sub" else first_script
            element = "munderover" if movable else "msubsup"
            node = MathNode(element, None, (inner_base, sub, sup))
        else:
            movable = id(base) in self._movable
            if new_kind == "sup":
                element = "mover" if movable else "msup"
            else:
                element = "munder" if movable else "msub"
            node = MathNode(element, None, (base, operand))
            self._script_origin[id(node)] = (new_kind, base, operand, movable)
        items.append(node)

    def _parse_paren_or_mo(self) -> MathNode:
        """A '(' opens a fence group when a matching ')' exists in scope."""
        opener = self.take()
        if not self._has_matching_paren():
            return MathNode("mo", "(")
        inner = self.parse_sequence(frozenset({"RPAREN"}))
        if _marker(self.peek()) != "RPAREN":
            # Only reachable when a command argument swallowed the closer.
            raise LatexError(opener.pos, "unbalanced '(' group")
        self.take()
        return MathNode(
            "mrow", None, (MathNode("mo", "("), *inner, MathNode("mo", ")"))
        )

    def _has_matching_paren(self) -> bool:
        paren = brace = left = 0
        for tok in self.tokens[self.i:]:
            kind, value = tok.kind, tok.value
            if kind == "lbrace":
                brace += 1
            elif kind == "rbrace":
                if brace == 0:
                    return False  # would cross the enclosing group
                brace -= 1
            elif kind == "command" and value == "left":
                left += 1
            elif kind == "command" and value == "right":
                if left == 0:
                    return False
                left -= 1
            elif kind == "op" and value == "(" and brace == 0 and left == 0:
                paren += 1
            elif kind == "op" and value == ")" and brace == 0 and left == 0:
                if paren == 0:
                    return True
                paren -= 1
        return False

    # -- atoms -------------------------------------------------------------

    def parse_atom(self, expected: str | None = None) -> MathNode:
        tok = self.take()
        if tok.kind == "letter":
            return MathNode("mi", tok.value)
        if tok.kind == "number":
            return MathNode("mn", tok.value)
        if tok.kind == "op":
            return MathNode("mo", tok.value)
        if tok.kind == "lbrace":
            return self._parse_group(tok)
        if tok.kind == "command":
            return self._parse_command(tok)
        if tok.kind == "rbrace":
            raise LatexError(tok.pos, "unbalanced '}'")
        # caret, underscore, end
        what = expected or "an operand"
        raise LatexError(tok.pos, "missing %s" % what)

    def _parse_group(self, opener: _Tok) -> MathNode:
        items = self.parse_sequence(frozenset({"RBRACE"}))
        if self.peek().kind != "rbrace":
            raise LatexError(opener.pos, "unbalanced '{'")
        self.take()
        if not items:
            raise LatexError(opener.pos, "missing argument: empty group")
        if len(items) == 1:
            return items[0]
        return MathNode("mrow", None, tuple(items))

    def _argument(self, command: _Tok) -> MathNode:
        return self.parse_atom(expected="argument for \\%s" % command.value)

    def _parse_command(self, tok: _Tok) -> MathNode:
        name = tok.value
        if name == "frac":
            numerator = self._argument(tok)
            denominator = self._argument(tok)
            return MathNode("mfrac", None, (numerator, denominator))
        if name == "sqrt":
            if self.peek().kind == "op" and self.peek().value == "[":
                bracket = self.take()
                degree_items = self.parse_sequence(frozenset({"RBRACKET"}))
                if _marker(self.peek()) != "RBRACKET":
                    raise LatexError(bracket.pos, "unbalanced '[' in \\sqrt")
                self.take()
                if not degree_items:
                    raise LatexError(bracket.pos, "missing argument: empty root degree")
                degree = (
                    degree_items[0]
                    if len(degree_items) == 1
                    else MathNode("mrow", None, tuple(degree_items))
                )
                radicand = self._argument(tok)
                return MathNode("mroot", None, (radicand, degree))
            radicand = self._argument(tok)
            return MathNode("msqrt", None, (radicand,))
        if name == "mathrm":
            return self._parse_mathrm(tok)
        if name == "left":
            return self._parse_left(tok)
        if name == "right":
            raise LatexError(tok.pos, "unbalanced \\right without \\left")
        if name in _MO_COMMANDS:
            node = MathNode("mo", _MO_COMMANDS[name])
            if name in _MOVABLE_LIMITS:
                self._movable.add(id(node))
            return node
        if name in _MI_COMMANDS:
            node = MathNode("mi", _MI_COMMANDS[name])
            if name in _MOVABLE_LIMITS:
                self._movable.add(id(node))
            return node
        raise LatexError(tok.pos, "unknown command \\%s" % name)

    def _parse_mathrm(self, tok: _Tok) -> MathNode:
        if self.peek().kind != "lbrace":
            raise LatexError(tok.pos, "missing argument for \\mathrm")
        self.take()
        letters: list[str] = []
        while self.peek().kind in ("letter", "number"):
            letters.append(self.take().value)
        closing = self.take()
        if closing.kind != "rbrace":
            raise LatexError(closing.pos, "\\mathrm accepts letters and digits only")
        if not letters:
            raise LatexError(tok.pos, "missing argument: empty \\mathrm")
        return MathNode("mi", "".join(letters))

    def _parse_left(self, tok: _Tok) -> MathNode:
        open_tok = self.take()
        if open_tok.kind != "op" or open_tok.value not in _FENCE_DELIMS:
            raise LatexError(open_tok.pos, "unsupported \\left delimiter")
        inner = self.parse_sequence(frozenset({"RIGHT"}))
        if _marker(self.peek()) != "RIGHT":
            raise LatexError(tok.pos, "unbalanced \\left without \\right")
        self.take()
        close_tok = self.take()
        if close_tok.kind != "op" or close_tok.value not in _FENCE_DELIMS:
            raise LatexError(close_tok.pos, "unsupported \\right delimiter")
        return MathNode(
            "mrow",
            None,
            (MathNode("mo", open_tok.value), *inner, MathNode("mo", close_tok.value)),
        )


def parse_latex(src: str) -> Formula:
    """Parse the supported LaTeX math subset into a presentation Formula.

    Raises LatexError (position, message) on unknown commands, unbalanced
    groups or fence pairs, dangling scripts, and characters outside the
    subset.  A single item stands alone; sibling sequences wrap in mrow.
    """
    tokens = _lex(src)
    parser = _Parser(tokens)
    items = parser.parse_sequence(frozenset({"END"}))
    if not items:
        # Unsatisfiable offset invariant on empty input; 0 is the best hint.
        raise LatexError(0, "empty input")
    root = items[0] if len(items) == 1 else MathNode("mrow", None, tuple(items))
    return Formula(root, encoding=PRESENTATION, source=SOURCE_LATEX)


# -- Content derivation ----------------------------------------------------

_RELATIONS = {"=": "eq", "<": "lt", ">": "gt",
              "≤": "leq", "≥": "geq", "≠": "neq"}
_ADDITIVE = {"+", "−", "-"}
_MULTIPLICATIVE = {"⋅": "times", "×": "times", "/": "divide"}

_MINUS = {"−", "-"}


def _operator_of(node: MathNode) -> str | None:
    if node.element == "mo":
        return node.text
    return None


def _content_node(node: MathNode) -> MathNode:
    element = node.element
    if element == "mi":
        if node.text in _FUNCTION_COMMANDS:
            # Function application, not a variable; outside the fragment.
            raise ContentUnsupported("function %r" % node.text)
        return MathNode("ci", node.text)
    if element == "mn":
        return MathNode("cn", node.text)
    if element == "msup":
        if len(node.children) != 2:
            raise ContentUnsupported("malformed msup")
        return MathNode("apply", None, (
            MathNode("power"),
            _content_node(node.children[0]),
            _content_node(node.children[1]),
        ))
    if element == "mfrac":
        if len(node.children) != 2:
            raise ContentUnsupported("malformed mfrac")
        return MathNode("apply", None, (
            MathNode("divide"),
            _content_node(node.children[0]),
            _content_node(node.children[1]),
        ))
    if element == "msqrt":
        # Implicit degree 2: Content root without an explicit degree term.
        return MathNode("apply", None, (
            MathNode("root"),
            _content_sequence(list(node.children)),
        ))
    if element == "mrow":
        return _content_sequence(list(node.children))
    raise ContentUnsupported("no Content form for <%s>" % element)


def _content_sequence(children: list[MathNode]) -> MathNode:
    # Fold fence pairs into single converted operands first; the remaining
    # flat list is parsed by precedence level.
    groups: list[list[tuple[str, MathNode]]] = [[]]
    for child in children:
        op = _operator_of(child)
        if op == "(":
            groups.append([])
        elif op == ")":
            if len(groups) == 1:
                raise ContentUnsupported("unbalanced ')'")
            inner = groups.pop()
            groups[-1].append(("done", _parse_relation(inner)))
        else:
            groups[-1].append(("raw", child))
    if len(groups) != 1:
        raise ContentUnsupported("unbalanced '('")
    return _parse_relation(groups[0])


def _operand(item: tuple[str, MathNode]) -> MathNode:
    state, node = item
    if state == "done":
        return node
    return _content_node(node)


def _split(items, operators: set[str]):
    """Split an item list on raw mo tokens from `operators`."""
    segments: list[list] = [[]]
    ops: list[str] = []
    for item in items:
        op = _operator_of(item[1]) if item[0] == "raw" else None
        if op is not None and op in operators:
            ops.append(op)
            segments.append([])
        else:
            segments[-1].append(item)
    return segments, ops


def _parse_relation(items) -> MathNode:
    if not items:
        raise ContentUnsupported("empty expression")
    segments, ops = _split(items, set(_RELATIONS))
    if not ops:
        return _parse_additive(segments[0])
    operands = [_parse_additive(seg) for seg in segments]
    names = [_RELATIONS[op] for op in ops]
    if len(set(names)) == 1:
        # A chain of one relation is a single n-ary application.
        return MathNode("apply", None, (MathNode(names[0]), *operands))
    acc = operands[0]
    for name, operand in zip(names, operands[1:]):
        acc = MathNode("apply", None, (MathNode(name), acc, operand))
    return acc


def _parse_additive(items) -> MathNode:
    segments, ops = _split(items, _ADDITIVE)
    if not ops:
        return _parse_multiplicative(segments[0])
    # A minus directly after another additive operator (or leading) is
    # unary: fold it into the segment that follows.
    terms: list[tuple[str, list]] = []  # (sign, segment)
    pending_sign = "+"
    if not segments[0]:
        first = ops.pop(0)
        segments.pop(0)
        if first not in _MINUS:
            raise ContentUnsupported("unary '+'")
        pending_sign = "-"
    terms.append((pending_sign, segments[0]))
    for op, segment in zip(ops, segments[1:]):
        if not segment:
            raise ContentUnsupported("dangling additive operator")
        terms.append(("-" if op in _MINUS else "+", segment))
    operands = [_parse_multiplicative(segment) for _, segment in terms]
    if all(sign == "+" for sign, _ in terms) and len(operands) > 1:
        # Pure + chain: one flat n-ary application.
        return MathNode("apply", None, (MathNode("plus"), *operands))
    acc: MathNode | None = None
    for (sign, _), operand in zip(terms, operands):
        if acc is None:
            if sign == "-":
                operand = MathNode("apply", None, (MathNode("minus"), operand))
            acc = operand
        elif sign == "+":
            acc = MathNode("apply", None, (MathNode("plus"), acc, operand))
        else:
            acc = MathNode("apply", None, (MathNode("minus"), acc, operand))
    return acc


def _parse_multiplicative(items) -> MathNode:
    if not items:
        raise ContentUnsupported("empty operand")
    segments, ops = _split(items, set(_MULTIPLICATIVE))
    if any(not seg for seg in segments):
        raise ContentUnsupported("dangling multiplicative operator")
    factors = [_parse_juxtaposition(seg) for seg in segments]
    if not ops:
        return factors[0]
    names = [_MULTIPLICATIVE[op] for op in ops]
    if all(name == "times" for name in names):
        return MathNode("apply", None, (MathNode("times"), *factors))
    acc = factors[0]
    for name, factor in zip(names, factors[1:]):
        acc = MathNode("apply", None, (MathNode(name), acc, factor))
    return acc


def _parse_juxtaposition(items) -> MathNode:
    for state, node in items:
        if state == "raw" and node.element == "mo":
            raise ContentUnsupported("operator %r outside the fragment" % node.text)
    operands = [_operand(item) for item in items]
    if len(operands) == 1:
        return operands[0]
    return MathNode("apply", None, (MathNode("times"), *operands))


def derive_content(f: Formula) -> Formula:
    """Translate the arithmetic/relational fragment into Content markup.

    Raises ContentUnsupported for anything outside the fragment (scripts
    other than msup, big operators, function application, unknown mo);
    callers then index the presentation encoding alone.
    """
    if f.encoding != PRESENTATION:
        raise ContentUnsupported("input is not presentation-encoded")
    node = f.root
    if node.element == "math":
        if len(node.children) == 1:
            node = node.children[0]
        elif node.children:
            root = _content_sequence(list(node.children))
            return Formula(root, encoding=CONTENT, source=f.source)
        else:
            raise ContentUnsupported("empty math element")
    return Formula(_content_node(node), encoding=CONTENT, source=f.source)
