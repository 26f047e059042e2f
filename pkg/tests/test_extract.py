import pytest

from formulary.extract import ExtractError, extract
from formulary.mathml import CONTENT, PRESENTATION, serialize_node


def test_spec_example_single_formula():
    result = extract("<p>let <math><mi>x</mi></math> be</p>")
    assert result.text == "let ⟦f#0⟧ be"
    assert len(result.formulae) == 1
    start, end = result.formulae[0].span
    assert result.text[start:end] == "⟦f#0⟧"
    assert result.warnings == []


def test_text_whitespace_collapses():
    result = extract("<p>  one\n\n  two  </p><p>three</p>")
    assert result.text == "one two three"


def test_placeholders_number_in_document_order():
    body = (
        "<p><math><mi>a</mi></math> then "
        "<math><mi>b</mi></math></p>"
    )
    result = extract(body)
    assert "⟦f#0⟧" in result.text and "⟦f#1⟧" in result.text
    spans = [f.span for f in result.formulae]
    assert spans == sorted(spans)
    for formula, (start, end) in zip(result.formulae, spans):
        assert result.text[start:end].startswith("⟦f#")


def test_spans_are_non_overlapping_and_in_bounds():
    body = "<p>%s</p>" % " ".join(
        "<math><mi>v%d</mi></math>" % i for i in range(5)
    )
    result = extract(body)
    previous_end = 0
    for _, (start, end) in ((f.formula, f.span) for f in result.formulae):
        assert 0 <= start < end <= len(result.text)
        assert start >= previous_end
        previous_end = end


def test_formulae_are_canonicalized():
    body = "<p><math><mrow><mrow><mi> x </mi></mrow></mrow></math></p>"
    result = extract(body)
    assert serialize_node(result.formulae[0].formula.root) == "<mi>x</mi>"


def test_semantics_pair_splits_sharing_one_span():
    body = (
        "<p>eq <math><semantics>"
        "<msup><mi>x</mi><mn>2</mn></msup>"
        '<annotation-xml encoding="MathML-Content">'
        "<apply><power/><ci>x</ci><cn>2</cn></apply>"
        "</annotation-xml>"
        "</semantics></math></p>"
    )
    result = extract(body)
    assert [f.formula.encoding for f in result.formulae] == [
        PRESENTATION,
        CONTENT,
    ]
    assert result.formulae[0].span == result.formulae[1].span
    assert result.text.count("⟦f#") == 1


def test_bad_formula_is_skipped_with_warning():
    body = (
        "<p>good <math><mi>x</mi></math>"
        " bad <math><blink>no</blink></math> end</p>"
    )
    result = extract(body)
    assert len(result.formulae) == 1
    assert len(result.warnings) == 1
    assert "blink" in result.warnings[0]
    # The broken element contributes neither text nor a placeholder.
    assert result.text == "good ⟦f#0⟧ bad end"


def test_warning_carries_element_path():
    body = "<div><p>a</p><p>b <math><bogus/></math></p></div>"
    result = extract(body)
    assert result.warnings and result.warnings[0].startswith(
        "div[1]/p[2]/math[1]:"
    )


def test_reserved_character_in_document_math_is_rejected():
    result = extract("<p><math><mi>§id</mi></math></p>")
    assert result.formulae == []
    assert any("reserved" in w for w in result.warnings)


def test_empty_math_element_warns():
    result = extract("<p>x <math></math> y</p>")
    assert result.formulae == []
    assert any("empty math" in w for w in result.warnings)
    assert result.text == "x y"


def test_malformed_body_raises():
    with pytest.raises(ExtractError) as err:
        extract("<p>unclosed")
    assert "well-formed" in str(err.value)


def test_mismatched_tags_raise():
    with pytest.raises(ExtractError):
        extract("<p><b>x</p></b>")


def test_namespace_prefixes_ignored():
    body = (
        '<p><m:math xmlns:m="http://www.w3.org/1998/Math/MathML">'
        "<m:mi>x</m:mi></m:math></p>"
    )
    result = extract(body)
    assert len(result.formulae) == 1
    assert serialize_node(result.formulae[0].formula.root) == "<mi>x</mi>"


def test_named_entities_in_body():
    result = extract("<p>&alpha; decay &amp; more</p>")
    assert result.text == "α decay & more"


def test_nested_markup_flattens_to_text():
    result = extract(
        "<div><h1>Title</h1>\n<p>Some <b>bold</b> body.</p></div>"
    )
    assert result.text == "Title Some bold body."


def test_inline_elements_do_not_split_words():
    # Tag boundaries carry no implicit whitespace, so split words such as
    # chemical subscripts stay joined.
    result = extract("<p>H<sub>2</sub>O is water</p>")
    assert result.text == "H2O is water"


def test_multiple_bad_formulae_each_warn():
    body = (
        "<p><math><bad1/></math><math><bad2/></math>"
        "<math><mi>k</mi></math></p>"
    )
    result = extract(body)
    assert len(result.warnings) == 2
    assert len(result.formulae) == 1


def test_text_only_body():
    result = extract("plain text, no markup beyond this")
    assert result.text == "plain text, no markup beyond this"
    assert result.formulae == []
