from formulary.analyzer import (
    tokenize_outside_spans,
    tokenize_text,
    tokenize_text_with_offsets,
)


def test_lowercase_and_min_length():
    assert tokenize_text("A Theory of Heat") == ["theory", "of", "heat"]


def test_split_on_non_alphanumeric():
    assert tokenize_text("mass-energy; E=mc2!") == ["mass", "energy", "mc2"]


def test_underscore_is_a_separator():
    assert tokenize_text("snake_case_name") == ["snake", "case", "name"]


def test_unicode_words_survive():
    assert tokenize_text("Čebyšev mērā") == ["čebyšev", "mērā"]


def test_digits_count_as_word_characters():
    assert tokenize_text("in 1905 Einstein") == ["in", "1905", "einstein"]


def test_offsets_index_original_text():
    text = "Mass--Energy"
    tokens = tokenize_text_with_offsets(text)
    assert tokens == [("mass", 0, 4), ("energy", 6, 12)]
    for token, start, end in tokens:
        assert text[start:end].lower() == token


def test_length_changing_case_fold_keeps_spans():
    # The dotted capital I lowercases to two codepoints; spans must still
    # address the original string.
    text = "İstanbul wins"
    tokens = tokenize_text_with_offsets(text)
    assert [(s, e) for _, s, e in tokens] == [(0, 8), (9, 13)]
    assert tokens[0][0] == "İstanbul".lower()


def test_single_characters_dropped():
    assert tokenize_text("a b cd e") == ["cd"]


def test_blocked_spans_drop_overlapping_tokens():
    text = "energy FORMULA0 mass"
    blocked = [(7, 15)]
    kept = tokenize_outside_spans(text, blocked)
    assert [t for t, _, _ in kept] == ["energy", "mass"]


def test_partial_overlap_also_blocks():
    text = "abcdef"
    assert tokenize_outside_spans(text, [(2, 3)]) == []
    assert tokenize_outside_spans(text, [(6, 9)]) == [("abcdef", 0, 6)]


def test_empty_input():
    assert tokenize_text("") == []
    assert tokenize_text_with_offsets("   \t\n") == []
