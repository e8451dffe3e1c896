"""Surface analysis for algebraic word problems.

Turns raw question text into a `Question`: tokens with character spans,
sentence boundaries, and typed mentions for numbers, measurement units, and
named entities (persons and places). Everything downstream (augmentation
operators, keyphrase ranking, test-set corruption) works off this view, so the
rules here are deliberately plain: a regex token grammar, a punctuation-plus-
capitalization sentence splitter with an abbreviation guard, and lexicon-backed
mention matching.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from decimal import Decimal

import numpy as np

from .errors import EmptyText, OutOfRange
from .lexicon import Lexicon, default_lexicon, pluralize

# Numbers: integers with optional thousands separators, decimals with a dot.
# No signs, fractions, or word forms; those stay ordinary word tokens.
_NUMBER_RE = r"\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+\.\d+|\d+"
_WORD_RE = r"[A-Za-z]+(?:'[A-Za-z]+)?"
_TOKEN_RE = re.compile(f"{_NUMBER_RE}|{_WORD_RE}|\\S")
_NUMBER_FULL = re.compile(_NUMBER_RE)

_SENT_END = {".", "?", "!"}
# tokens whose trailing period is not a sentence boundary
_ABBREV_GUARD = {"mr", "mrs", "dr", "rs", "vs"}

STOPWORDS = frozenset("""
a about above after again all also an and another any are as at be been before
being below between both but by can could did do does done down during each
either else every few for from had has have he her hers him his how i if in
into is it its just may me might more most much must my no none nor not now of
off on once only or other our out over own per she should so some such than
that the their them then there these they this those through to too under until
up us very was we were what when where which while who whom why will with would
you your
""".split())


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int


@dataclass(frozen=True)
class NumberMention:
    surface: str
    value: Decimal
    tok: int
    start: int
    end: int


@dataclass(frozen=True)
class UnitMention:
    name: str            # canonical lexicon name
    category: str
    surface: str
    form: str            # "abbreviated" or "expanded"
    plural: bool
    tok_start: int
    tok_end: int
    start: int
    end: int


@dataclass(frozen=True)
class EntityMention:
    surface: str
    category: str        # "Person" or "Place"
    tok_start: int
    tok_end: int
    start: int
    end: int


@dataclass(frozen=True)
class Question:
    """Analyzed question text. Treat as read-only."""
    text: str
    tokens: list[Token]
    sentences: list[tuple[int, int]]     # token index ranges, half open
    numbers: list[NumberMention]
    units: list[UnitMention]
    entities: list[EntityMention]
    qid: str | None = None

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)

    def sentence_char_span(self, i: int) -> tuple[int, int]:
        ts, te = self.sentences[i]
        return self.tokens[ts].start, self.tokens[te - 1].end

    def sentence_text(self, i: int) -> str:
        a, b = self.sentence_char_span(i)
        return self.text[a:b]

    def sentence_of_token(self, tok: int) -> int:
        for i, (ts, te) in enumerate(self.sentences):
            if ts <= tok < te:
                return i
        raise IndexError(tok)


def tokenize(text: str) -> list[Token]:
    return [Token(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def is_number_surface(surface: str) -> bool:
    return _NUMBER_FULL.fullmatch(surface) is not None


def parse_number(surface: str) -> Decimal:
    return Decimal(surface.replace(",", ""))


def split_sentences(tokens: list[Token]) -> list[tuple[int, int]]:
    """Token ranges of sentences.

    A boundary falls after '.', '?' or '!' when the next token starts with a
    capital letter or digit (or input ends), unless the period belongs to a
    known abbreviation such as "Dr." or "Rs.".
    """
    bounds = []
    n = len(tokens)
    for i, tok in enumerate(tokens):
        if tok.surface not in _SENT_END:
            continue
        if tok.surface == "." and i > 0 and tokens[i - 1].surface.lower() in _ABBREV_GUARD:
            continue
        if i + 1 == n or tokens[i + 1].surface[0].isupper() or tokens[i + 1].surface[0].isdigit():
            bounds.append(i + 1)
    spans = []
    start = 0
    for b in bounds:
        spans.append((start, b))
        start = b
    if start < n:
        spans.append((start, n))
    return spans


def _find_numbers(tokens: list[Token]) -> list[NumberMention]:
    out = []
    for i, tok in enumerate(tokens):
        if is_number_surface(tok.surface):
            out.append(NumberMention(tok.surface, parse_number(tok.surface),
                                     i, tok.start, tok.end))
    return out


def _find_units(tokens: list[Token], sentences: list[tuple[int, int]],
                number_toks: set[int], lex: Lexicon) -> list[UnitMention]:
    units = lex.units
    out: list[UnitMention] = []
    claimed: set[int] = set()

    def add(name, form, plural, ts, te):
        e = units.entry(name)
        surface = " ".join(tokens[k].surface for k in range(ts, te))
        out.append(UnitMention(name, e.category, surface, form, plural,
                               ts, te, tokens[ts].start, tokens[te - 1].end))
        claimed.update(range(ts, te))

    # abbreviated mentions need an adjacent number: "100 km", "$5", "Rs. 500"
    for ts, te in sentences:
        for i in range(ts, te):
            surf = tokens[i].surface
            name = units.abbrev_to_name.get(surf.lower())
            if name is None or i in claimed:
                continue
            before = i - 1 >= ts and i - 1 in number_toks
            j = i + 1
            if j < te and tokens[j].surface == ".":
                j += 1
            after = j < te and j in number_toks
            is_currency = units.entry(name).category == "Currency"
            if before or (after and (is_currency or not surf.isalpha())):
                add(name, "abbreviated", False, i, i + 1)

    # expanded mentions match written-out forms anywhere in a sentence
    for ts, te in sentences:
        i = ts
        while i < te:
            if i in claimed or i in number_toks or not tokens[i].surface.isalpha():
                i += 1
                continue
            matched = False
            max_len = min(units.max_form_len, te - i)
            for length in range(max_len, 0, -1):
                if any(k in claimed for k in range(i, i + length)):
                    continue
                key = tuple(tokens[k].surface.lower() for k in range(i, i + length))
                hit = units.form_to_name.get(key)
                if hit is not None:
                    add(hit[0], "expanded", hit[1], i, i + length)
                    i += length
                    matched = True
                    break
            if not matched:
                i += 1
    out.sort(key=lambda u: u.start)
    return out


def _find_entities(tokens: list[Token], sentences: list[tuple[int, int]],
                   lex: Lexicon) -> list[EntityMention]:
    persons = lex.entities.person_set()
    place_forms = lex.entities.place_forms()
    max_place = max((len(k) for k in place_forms), default=1)
    out: list[EntityMention] = []
    claimed: set[int] = set()

    def capitalized(i: int) -> bool:
        s = tokens[i].surface
        return s[0].isupper() and s.isalpha()

    for ts, te in sentences:
        i = ts
        while i < te:
            if i in claimed or not capitalized(i):
                i += 1
                continue
            matched = False
            for length in range(min(max_place, te - i), 0, -1):
                if not all(capitalized(k) for k in range(i, i + length)):
                    continue
                key = tuple(tokens[k].surface.lower() for k in range(i, i + length))
                if key in place_forms:
                    out.append(EntityMention(
                        " ".join(tokens[k].surface for k in range(i, i + length)),
                        "Place", i, i + length, tokens[i].start, tokens[i + length - 1].end))
                    claimed.update(range(i, i + length))
                    i += length
                    matched = True
                    break
            if matched:
                continue
            if tokens[i].surface.lower() in persons:
                out.append(EntityMention(tokens[i].surface, "Person", i, i + 1,
                                         tokens[i].start, tokens[i].end))
                claimed.add(i)
            i += 1
    return out


def analyze(text: str, lexicon: Lexicon | None = None, qid: str | None = None) -> Question:
    """Analyze one question. Raises EmptyText on blank input."""
    if lexicon is None:
        lexicon = default_lexicon()
    text = unicodedata.normalize("NFC", text)
    if not text.strip():
        raise EmptyText("question text is empty")
    tokens = tokenize(text)
    sentences = split_sentences(tokens)
    numbers = _find_numbers(tokens)
    number_toks = {m.tok for m in numbers}
    units = _find_units(tokens, sentences, number_toks, lexicon)
    entities = _find_entities(tokens, sentences, lexicon)
    return Question(text, tokens, sentences, numbers, units, entities, qid=qid)


# ---------------------------------------------------------------------------
# number words

_ONES = ["zero", "one", "two", "three", "four", "five", "six", "seven",
         "eight", "nine"]
_TEENS = ["ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
          "sixteen", "seventeen", "eighteen", "nineteen"]
_TENS = [None, None, "twenty", "thirty", "forty", "fifty", "sixty",
         "seventy", "eighty", "ninety"]


def _two_digit_words(n: int) -> str:
    if n < 10:
        return _ONES[n]
    if n < 20:
        return _TEENS[n - 10]
    t, o = divmod(n, 10)
    return _TENS[t] + (f"-{_ONES[o]}" if o else "")


def _three_digit_words(n: int) -> str:
    h, r = divmod(n, 100)
    parts = []
    if h:
        parts.append(f"{_ONES[h]} hundred")
    if r or not parts:
        parts.append(_two_digit_words(r))
    return " ".join(parts)


def number_to_words(value: Decimal | int | str) -> str:
    """Render a non-negative decimal in words.

    Integer part uses standard long form below one billion; fractional digits
    are read one at a time after "point", so 3.5 becomes "three point five".
    """
    dec = value if isinstance(value, Decimal) else Decimal(str(value))
    if dec < 0:
        raise OutOfRange(f"negative value {dec}")
    sign, digits, exponent = dec.as_tuple()
    if exponent > 0:                       # e.g. Decimal("1E+2"); normalize away
        dec = dec.quantize(Decimal(1))
        sign, digits, exponent = dec.as_tuple()
    frac_digits = [0] * max(0, -exponent - len(digits))
    if exponent < 0:
        frac_digits += list(digits[len(digits) + exponent:] if -exponent <= len(digits)
                            else digits)
        int_digits = digits[:len(digits) + exponent] if -exponent <= len(digits) else ()
    else:
        int_digits = digits
    int_part = int("".join(map(str, int_digits)) or "0")
    if int_part >= 10 ** 9:
        raise OutOfRange(f"{int_part} is not below one billion")

    if int_part == 0:
        words = ["zero"]
    else:
        words = []
        for scale, name in ((10 ** 6, "million"), (10 ** 3, "thousand")):
            if int_part >= scale:
                words.append(f"{_three_digit_words(int_part // scale)} {name}")
                int_part %= scale
        if int_part:
            words.append(_three_digit_words(int_part))
    if exponent < 0:
        words.append("point")
        words.extend(_ONES[d] for d in frac_digits)
    return " ".join(words)


# ---------------------------------------------------------------------------
# unit operations

def expand_unit(mention: UnitMention, lexicon: Lexicon | None = None) -> str:
    """Written-out form of an abbreviated unit mention."""
    if mention.form != "abbreviated":
        raise ValueError(f"mention {mention.surface!r} is not abbreviated")
    lexicon = lexicon or default_lexicon()
    return lexicon.units.expansion(mention.name)


def alternate_unit(name: str, rng: np.random.Generator,
                   lexicon: Lexicon | None = None) -> str:
    """Uniformly sampled same-category unit distinct from `name`."""
    lexicon = lexicon or default_lexicon()
    return lexicon.units.sample_alternate(name, rng)


def unit_replacement_surface(mention: UnitMention, alt_name: str,
                             lexicon: Lexicon | None = None) -> str:
    """Surface text that stands in for `mention` when swapping to `alt_name`.

    Abbreviated mentions swap to the alternative's primary abbreviation
    (falling back to its expansion when it has none); expanded mentions swap
    to the alternative's expansion, pluralized to match the original.
    """
    lexicon = lexicon or default_lexicon()
    units = lexicon.units
    if mention.form == "abbreviated":
        return units.primary_abbrev(alt_name) or units.expansion(alt_name)
    exp = units.expansion(alt_name)
    if mention.plural:
        words = exp.split()
        return " ".join([pluralize(words[0])] + words[1:])
    return exp


# ---------------------------------------------------------------------------
# edit helpers

_SPACE_BEFORE_PUNCT = re.compile(r"\s+([.,?!;:])")


def normalize_space(s: str) -> str:
    s = re.sub(r"\s+", " ", s).strip()
    return _SPACE_BEFORE_PUNCT.sub(r"\1", s)


def replace_spans(text: str, replacements: list[tuple[int, int, str]]) -> str:
    """Apply non-overlapping (start, end, new_text) edits to `text`."""
    ordered = sorted(replacements, key=lambda r: r[0])
    for (_, e1, _), (s2, _, _) in zip(ordered, ordered[1:]):
        if s2 < e1:
            raise ValueError("overlapping replacement spans")
    out = []
    pos = 0
    for s, e, new in ordered:
        out.append(text[pos:s])
        out.append(new)
        pos = e
    out.append(text[pos:])
    return "".join(out)


def smart_join(surfaces: list[str]) -> str:
    """Join token surfaces with spaces, minus the spaces plain prose omits."""
    out = []
    for i, s in enumerate(surfaces):
        if i and s not in {".", ",", "?", "!", ";", ":"} and out[-1] != "$":
            out.append(" ")
        out.append(s)
    return "".join(out)
