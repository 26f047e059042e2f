import random
import string

import pytest

from formulary.latex import (
    ContentUnsupported,
    LatexError,
    derive_content,
    parse_latex,
)
from formulary.mathml import CONTENT, Formula, MathNode, PRESENTATION


def mi(t): return MathNode("mi", t)
def mn(t): return MathNode("mn", t)
def mo(t): return MathNode("mo", t)
def row(*kids): return MathNode("mrow", None, kids)
def ci(t): return MathNode("ci", t)
def cn(t): return MathNode("cn", t)
def apply(head, *args): return MathNode("apply", None, (MathNode(head), *args))


def test_paper_example_structure():
    result = parse_latex("E=mc^2")
    assert result.root == row(
        mi("E"), mo("="), mi("m"),
        MathNode("msup", None, (mi("c"), mn("2"))),
    )
    assert result.encoding == PRESENTATION
    assert result.source == "latex"


def test_single_token_has_no_wrapper():
    assert parse_latex("x").root == mi("x")


def test_frac():
    assert parse_latex("\\frac{a}{b}").root == MathNode(
        "mfrac", None, (mi("a"), mi("b"))
    )


def test_unknown_command_rejected_with_position():
    with pytest.raises(LatexError) as err:
        parse_latex("\\foo{x}")
    assert err.value.position == 0
    assert "\\foo" in err.value.message


def test_decimal_number_is_one_token():
    assert parse_latex("3.14").root == mn("3.14")


def test_subscript_superscript_merge_to_msubsup():
    expected = MathNode("msubsup", None, (mi("x"), mn("1"), mn("2")))
    assert parse_latex("x_1^2").root == expected
    assert parse_latex("x^2_1").root == expected


def test_chained_same_script_nests():
    result = parse_latex("x^2^3").root
    assert result.element == "msup"
    assert result.children[0].element == "msup"


def test_sum_limits_are_movable():
    result = parse_latex("\\sum_{i=1}^{n} i").root
    assert result.children[0].element == "munderover"
    assert result.children[0].children[0] == mo("\u2211")


def test_integral_limits_are_scripts():
    result = parse_latex("\\int_0^1 x").root
    assert result.children[0].element == "msubsup"
    assert result.children[0].children[0] == mo("\u222b")


def test_lim_takes_under_script():
    result = parse_latex("\\lim_{n} a").root
    assert result.children[0].element == "munder"
    assert result.children[0].children[0] == mi("lim")


def test_mathrm_makes_single_identifier():
    assert parse_latex("\\mathrm{sinc}").root == mi("sinc")


def test_function_and_greek_commands():
    assert parse_latex("\\sin").root == mi("sin")
    assert parse_latex("\\alpha").root == mi("\u03b1")
    assert parse_latex("\\Omega").root == mi("\u03a9")
    assert parse_latex("\\epsilon").root == mi("\u03f5")
    assert parse_latex("\\varepsilon").root == mi("\u03b5")
    assert parse_latex("\\infty").root == mi("\u221e")


def test_operator_commands():
    assert parse_latex("a \\cdot b").root.children[1] == mo("\u22c5")
    assert parse_latex("a \\times b").root.children[1] == mo("\u00d7")
    assert parse_latex("x \\leq y").root.children[1] == mo("\u2264")
    assert parse_latex("x \\pm y").root.children[1] == mo("\u00b1")


def test_hyphen_becomes_unicode_minus_at_parse():
    assert parse_latex("x-y").root.children[1] == mo("\u2212")
    assert parse_latex("-x").root == row(mo("\u2212"), mi("x"))


def test_sqrt_and_root():
    assert parse_latex("\\sqrt{x}").root == MathNode("msqrt", None, (mi("x"),))
    assert parse_latex("\\sqrt[3]{x}").root == MathNode(
        "mroot", None, (mi("x"), mn("3"))
    )


def test_explicit_and_bare_fences():
    expected = row(mo("("), mi("x"), mo(")"))
    assert parse_latex("\\left( x \\right)").root == expected
    assert parse_latex("(x)").root == expected


def test_unmatched_paren_is_plain_operator():
    assert parse_latex("(x").root == row(mo("("), mi("x"))
    assert parse_latex(")").root == mo(")")


def test_juxtaposition_inserts_no_operator():
    assert parse_latex("ab").root == row(mi("a"), mi("b"))


def test_group_braces_disappear():
    assert parse_latex("{x}").root == mi("x")
    assert parse_latex("{a+b}").root == row(mi("a"), mo("+"), mi("b"))


def test_error_cases():
    for src in ("x^", "x_", "{x", "}", "{}", "\\left( x", "\\frac{a}",
                "\\", "x&y"):
        with pytest.raises(LatexError) as err:
            parse_latex(src)
        assert 0 <= err.value.position < len(src)
        assert err.value.message


def test_empty_input_rejected():
    with pytest.raises(LatexError) as err:
        parse_latex("")
    assert err.value.position == 0


def test_totality_fuzz():
    rng = random.Random(20140714)
    alphabet = string.ascii_letters + string.digits + "\\{}^_+-*/=<>()[]|,. $#&"
    for _ in range(500):
        src = "".join(
            rng.choice(alphabet) for _ in range(rng.randint(0, 24))
        )
        try:
            result = parse_latex(src)
            assert isinstance(result, Formula)
        except LatexError as err:
            assert err.value if False else True
            assert 0 <= err.position <= max(len(src) - 1, 0)


def test_determinism():
    first = parse_latex("\\frac{x+1}{y} \\cdot z^2")
    second = parse_latex("\\frac{x+1}{y} \\cdot z^2")
    assert first.root == second.root


# -- content derivation -------------------------------------------------------


def derive(src: str) -> MathNode:
    result = derive_content(parse_latex(src))
    assert result.encoding == CONTENT
    return result.root


def test_derive_paper_example():
    assert derive("E=mc^2") == apply(
        "eq", ci("E"), apply("times", ci("m"), apply("power", ci("c"), cn("2")))
    )


def test_derive_leaf():
    assert derive("x") == ci("x")


def test_derive_sum_is_unsupported():
    with pytest.raises(ContentUnsupported):
        derive_content(parse_latex("\\sum_{i}^{n} i"))


def test_derive_nary_plus_chain():
    assert derive("a+b+c") == apply("plus", ci("a"), ci("b"), ci("c"))


def test_derive_minus_left_associates():
    assert derive("a-b-c") == apply(
        "minus", apply("minus", ci("a"), ci("b")), ci("c")
    )


def test_derive_mixed_additive_left_fold():
    assert derive("a+b-c") == apply(
        "minus", apply("plus", ci("a"), ci("b")), ci("c")
    )


def test_derive_unary_minus():
    assert derive("-x") == apply("minus", ci("x"))


def test_derive_relation_chain_flat():
    assert derive("x=y=z") == apply("eq", ci("x"), ci("y"), ci("z"))


def test_derive_mixed_relations_fold_left():
    assert derive("x=y<z") == apply(
        "lt", apply("eq", ci("x"), ci("y")), ci("z")
    )


def test_derive_division_and_frac_agree():
    assert derive("a/b") == apply("divide", ci("a"), ci("b"))
    assert derive("\\frac{a}{b}") == apply("divide", ci("a"), ci("b"))


def test_derive_product_chain_flat():
    assert derive("a \\cdot b \\cdot c") == apply(
        "times", ci("a"), ci("b"), ci("c")
    )


def test_derive_sqrt_implicit_degree():
    assert derive("\\sqrt{x}") == apply("root", ci("x"))


def test_derive_parenthesized_group_stays_nested():
    assert derive("(a+b)c") == apply(
        "times", apply("plus", ci("a"), ci("b")), ci("c")
    )
    assert derive("(a+b)+c") == apply(
        "plus", apply("plus", ci("a"), ci("b")), ci("c")
    )


def test_derive_rejects_functions():
    with pytest.raises(ContentUnsupported):
        derive_content(parse_latex("\\sin x"))


def test_derive_requires_presentation_encoding():
    content = Formula(ci("x"), encoding=CONTENT, source="latex")
    with pytest.raises(ContentUnsupported):
        derive_content(content)


def test_fragment_soundness_leaf_multisets_match():
    fixtures = ("E=mc^2", "a+b+c", "x^2+y^2", "\\frac{a}{b}", "(a+b)/2",
                "x \\cdot y", "-x+y", "\\sqrt{x+1}", "ab2")
    for src in fixtures:
        presentation = parse_latex(src)
        content = derive_content(presentation)
        before = sorted(
            n.text for n in presentation.root.iter_nodes()
            if n.element in ("mi", "mn")
        )
        after = sorted(
            n.text for n in content.root.iter_nodes()
            if n.element in ("ci", "cn")
        )
        assert before == after, src
