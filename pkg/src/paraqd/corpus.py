"""Corpus loading and synthetic question generation.

Input corpora are JSON lines with "id" and "question" fields. The synthetic
generator fills arithmetic word-problem templates (travel, purchase,
work-rate, mixture and friends) from the bundled name/place/unit lexicons,
so a seeded call yields the same analyzable questions every time.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import DuplicateId, EmptyText, ParseError
from .lexicon import Lexicon, default_lexicon
from .text import Question, analyze


def ingest(path, lexicon: Lexicon | None = None) -> list[Question]:
    """Parse a question JSONL file; blank lines are skipped."""
    lexicon = lexicon or default_lexicon()
    questions: list[Question] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, f"bad JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise ParseError(line_no, "record is not an object")
            if "id" not in record or "question" not in record:
                raise ParseError(line_no, "missing id or question field")
            qid = record["id"]
            if not isinstance(qid, (str, int)) or isinstance(qid, bool):
                raise ParseError(line_no, "id must be a string or integer")
            qid = str(qid)
            text = record["question"]
            if not isinstance(text, str):
                raise ParseError(line_no, "question must be a string")
            if qid in seen:
                raise DuplicateId(f"duplicate id {qid!r} at line {line_no}")
            seen.add(qid)
            try:
                questions.append(analyze(text, lexicon, qid=qid))
            except EmptyText as exc:
                raise ParseError(line_no, "empty question") from exc
    return questions


def write_corpus(path, questions) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in questions:
            fh.write(json.dumps({"id": q.qid, "question": q.text},
                                ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# synthetic questions

def _t_travel(rng, name, name2, place, place2):
    d, s = int(rng.integers(6, 95)) * 10, int(rng.integers(2, 19)) * 5
    return (f"{name} travelled {d} km from {place} at a constant speed of "
            f"{s} kmph. How many hours did the trip take?")


def _t_drive(rng, name, name2, place, place2):
    d, t = int(rng.integers(8, 60)) * 10, int(rng.integers(2, 12))
    return (f"{name} drove {d} miles to {place} in {t} hours. "
            f"What was the average speed in mph?")


def _t_purchase(rng, name, name2, place, place2):
    n, c = int(rng.integers(3, 30)), int(rng.integers(5, 90))
    return (f"{name} bought {n} pens for {c} dollars in {place}. "
            f"How many cents does one pen cost?")


def _t_shop(rng, name, name2, place, place2):
    c = int(rng.integers(20, 190)) * 10
    p = int(rng.integers(2, 30)) * 10
    return (f"A shopkeeper in {place} sold a bag for Rs. {c} and made a "
            f"profit of Rs. {p}. What was the cost price?")


def _t_work(rng, name, name2, place, place2):
    a = int(rng.integers(2, 15))
    b = a + int(rng.integers(1, 12))
    return (f"{name} can paint a wall in {a} hours and {name2} can paint it "
            f"in {b} hours. How many hours will they take together?")


def _t_walk(rng, name, name2, place, place2):
    d, t = int(rng.integers(20, 90)) * 10, int(rng.integers(5, 45))
    return (f"{name} walked {d} m in {t} minutes. "
            f"How many m does {name} cover per minute?")


def _t_rope(rng, name, name2, place, place2):
    l, k = int(rng.integers(4, 40)), int(rng.integers(2, 9))
    return (f"A rope is {l} m long. {name} cuts it into {k} equal pieces. "
            f"How many cm long is each piece?")


def _t_basket(rng, name, name2, place, place2):
    n, w = int(rng.integers(4, 40)), int(rng.integers(8, 60)) * 5
    return (f"A basket holds {n} apples weighing {w} g each. "
            f"How many kg do the apples weigh in total?")


def _t_crate(rng, name, name2, place, place2):
    a, b = int(rng.integers(3, 60)), int(rng.integers(4, 15))
    return (f"A crate in {place} weighs {a} pounds and a box weighs {b} "
            f"ounces. How many ounces do they weigh together?")


def _t_save(rng, name, name2, place, place2):
    c, k = int(rng.integers(4, 80)) * 5, int(rng.integers(3, 30))
    return (f"{name} saves {c} rupees every week. "
            f"How many rupees does {name} save in {k} weeks?")


def _t_train(rng, name, name2, place, place2):
    s, t = int(rng.integers(6, 24)) * 5, int(rng.integers(2, 14))
    return (f"A train leaves {place} at a speed of {s} mph and travels for "
            f"{t} hours. How many miles does it cover?")


def _t_earn(rng, name, name2, place, place2):
    c, k = int(rng.integers(8, 95)), int(rng.integers(4, 28))
    return (f"{name} earns {c} dollars per day in {place}. "
            f"How many dollars does {name} earn in {k} days?")


def _t_run(rng, name, name2, place, place2):
    d, t = int(rng.integers(10, 80)) * 10, int(rng.integers(20, 200))
    return (f"{name} ran {d} m in {t} seconds. "
            f"How many seconds does {name} need for twice the distance?")


def _t_rice(rng, name, name2, place, place2):
    whole, frac = int(rng.integers(2, 9)), int(rng.integers(1, 10))
    v = int(rng.integers(3, 50)) * 10
    return (f"{name} poured {whole}.{frac} kg of rice into a sack in "
            f"{place}. A cup holds {v} g. How many cups are needed?")


def _t_mixture(rng, name, name2, place, place2):
    a, b = int(rng.integers(5, 90)) * 5, int(rng.integers(2, 40)) * 5
    return (f"A mixture contains {a} g of sugar and {b} g of salt. "
            f"How many g does the mixture weigh?")


TEMPLATES = (_t_travel, _t_drive, _t_purchase, _t_shop, _t_work, _t_walk,
             _t_rope, _t_basket, _t_crate, _t_save, _t_train, _t_earn,
             _t_run, _t_rice, _t_mixture)

# Real word-problem collections reuse a small cast of names and towns, so the
# generator draws from a compact slice of each lexicon rather than the whole
# list. Keeps corpora of a few hundred questions lexically dense.
CAST_PERSONS = 96
CAST_PLACES = 64


def synth_corpus(n: int, seed: int = 0,
                 lexicon: Lexicon | None = None) -> list[Question]:
    """`n` distinct seeded questions cycling through all templates."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lexicon = lexicon or default_lexicon()
    rng = np.random.default_rng([seed, 0xC0125])
    persons = lexicon.entities.persons[:CAST_PERSONS]
    places = lexicon.entities.places[:CAST_PLACES]
    texts: list[str] = []
    seen: set[str] = set()
    attempts = 0
    while len(texts) < n:
        if attempts > 80 * n:
            raise RuntimeError("could not generate enough distinct questions")
        attempts += 1
        template = TEMPLATES[len(texts) % len(TEMPLATES)]
        name, name2 = rng.choice(len(persons), size=2, replace=False)
        place, place2 = rng.choice(len(places), size=2, replace=False)
        text = template(rng, persons[name], persons[name2],
                        places[place], places[place2])
        if text in seen:
            continue
        seen.add(text)
        texts.append(text)
    return [analyze(text, lexicon, qid=f"synth-{i:04d}")
            for i, text in enumerate(texts)]
