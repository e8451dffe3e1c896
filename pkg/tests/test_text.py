from decimal import Decimal

import numpy as np
import pytest

from paraqd.errors import EmptyText, OutOfRange, UnknownUnit
from paraqd.text import (Question, analyze, normalize_space, number_to_words,
                         parse_number, replace_spans, split_sentences,
                         tokenize, unit_replacement_surface)

# Hand-written oracle for the words renderer, 0..100 plus structure points.
WORD_TABLE = {
    0: "zero", 1: "one", 2: "two", 3: "three", 4: "four", 5: "five",
    6: "six", 7: "seven", 8: "eight", 9: "nine", 10: "ten", 11: "eleven",
    12: "twelve", 13: "thirteen", 14: "fourteen", 15: "fifteen",
    16: "sixteen", 17: "seventeen", 18: "eighteen", 19: "nineteen",
    20: "twenty", 21: "twenty-one", 30: "thirty", 40: "forty", 42: "forty-two",
    50: "fifty", 60: "sixty", 70: "seventy", 77: "seventy-seven",
    80: "eighty", 90: "ninety", 99: "ninety-nine", 100: "one hundred",
}

STRUCTURED = {
    101: "one hundred one",
    110: "one hundred ten",
    215: "two hundred fifteen",
    999: "nine hundred ninety-nine",
    1000: "one thousand",
    1004: "one thousand four",
    20000: "twenty thousand",
    123456: "one hundred twenty-three thousand four hundred fifty-six",
    1000000: "one million",
    2000001: "two million one",
    999999999: ("nine hundred ninety-nine million nine hundred ninety-nine "
                "thousand nine hundred ninety-nine"),
}


def test_word_table():
    for n, words in WORD_TABLE.items():
        assert number_to_words(Decimal(n)) == words, n


def test_word_structure():
    for n, words in STRUCTURED.items():
        assert number_to_words(Decimal(n)) == words, n


def test_fractional_digits_read_digitwise():
    assert number_to_words(Decimal("3.5")) == "three point five"
    assert number_to_words(Decimal("3.50")) == "three point five zero"
    assert number_to_words(Decimal("0.25")) == "zero point two five"


def test_words_out_of_range():
    with pytest.raises(OutOfRange):
        number_to_words(Decimal(-1))
    with pytest.raises(OutOfRange):
        number_to_words(Decimal(10 ** 9))


def _parse_words(words: str) -> int:
    """Independent inverse of the renderer for integers, used as an oracle."""
    small = {w: n for n, w in WORD_TABLE.items() if n <= 20 or w.isalpha()}
    small.update({"thirty": 30, "forty": 40, "fifty": 50, "sixty": 60,
                  "seventy": 70, "eighty": 80, "ninety": 90})
    total, group = 0, 0
    for tok in words.replace("-", " ").split():
        if tok == "hundred":
            group *= 100
        elif tok == "thousand":
            total += group * 1000
            group = 0
        elif tok == "million":
            total += group * 1000000
            group = 0
        else:
            group += small[tok]
    return total + group


def test_words_round_trip_sampled():
    rng = np.random.default_rng(4)
    samples = list(rng.integers(0, 10 ** 6, size=300)) + [999999, 100000]
    for n in samples:
        n = int(n)
        assert _parse_words(number_to_words(Decimal(n))) == n


# ---------------------------------------------------------------------------
# tokenizer and sentences

def test_tokenize_surfaces():
    toks = tokenize("Alex's dog ate 3.5 kg, truly!")
    assert [t.surface for t in toks] == [
        "Alex's", "dog", "ate", "3.5", "kg", ",", "truly", "!"]


def test_tokenize_offsets_recover_surface():
    text = "It cost $1,200.50 yesterday."
    for tok in tokenize(text):
        assert text[tok.start:tok.end] == tok.surface


def test_comma_grouped_number_single_token():
    toks = tokenize("save 1,200,300 now")
    assert toks[1].surface == "1,200,300"
    assert parse_number("1,200,300") == Decimal("1200300")


def test_sentence_split_basic():
    text = "I ran. You walked! Did he jump?"
    sents = split_sentences(tokenize(text))
    assert len(sents) == 3


def test_sentence_split_abbreviation_guard():
    text = "It sold for Rs. 500 in the market. What was the profit?"
    sents = split_sentences(tokenize(text))
    assert len(sents) == 2


def test_analyze_empty_rejected():
    with pytest.raises(EmptyText):
        analyze("   ")


# ---------------------------------------------------------------------------
# the walked-through question

def test_q0_numbers(q0):
    assert [n.surface for n in q0.numbers] == ["100", "20"]
    assert [n.value for n in q0.numbers] == [Decimal(100), Decimal(20)]


def test_q0_units(q0):
    by_name = {u.name: u for u in q0.units}
    assert "km" in by_name and by_name["km"].category == "Length"
    assert "kmph" in by_name and by_name["kmph"].category == "Speed"


def test_q0_entities(q0):
    surfaces = {e.surface for e in q0.entities}
    assert "Alex" in surfaces
    assert "New York" in surfaces
    cats = {e.surface: e.category for e in q0.entities}
    assert cats["Alex"] == "Person"
    assert cats["New York"] == "Place"


def test_q0_sentences(q0):
    assert q0.n_sentences == 2
    assert q0.sentence_text(1) == "How many hours did it take him in total?"


def test_abbreviated_unit_requires_adjacent_number(lexicon):
    q = analyze("The m was painted blue.", lexicon)
    assert not q.units
    q2 = analyze("He walked 5 m today.", lexicon)
    assert [u.name for u in q2.units] == ["m"]


def test_currency_number_after_abbreviation(lexicon):
    q = analyze("It sold for Rs. 500 quickly.", lexicon)
    assert any(u.name == "rupee" for u in q.units)


def test_expanded_unit_no_adjacency_needed(lexicon):
    q = analyze("The dollars were spent over many hours.", lexicon)
    names = {u.name for u in q.units}
    assert names == {"dollar", "hour"}
    assert all(u.plural for u in q.units)


# ---------------------------------------------------------------------------
# surface helpers

def test_normalize_space():
    assert normalize_space("a  b ,  c .") == "a b, c."
    assert normalize_space("  x   ") == "x"


def test_replace_spans_disjoint():
    text = "abc def ghi"
    out = replace_spans(text, [(0, 3, "X"), (8, 11, "YZ")])
    assert out == "X def YZ"


def test_unit_replacement_surface_plural(lexicon):
    q = analyze("He waited three hours there.", lexicon)
    mention = q.units[0]
    surface = unit_replacement_surface(mention, "minute", lexicon)
    assert surface == "minutes"


def test_unit_replacement_surface_abbrev(lexicon):
    q = analyze("She ran 5 km fast.", lexicon)
    mention = q.units[0]
    assert unit_replacement_surface(mention, "m", lexicon) == "m"


def test_question_is_frozen(q0):
    assert isinstance(q0, Question)
    with pytest.raises(AttributeError):
        q0.text = "other"
