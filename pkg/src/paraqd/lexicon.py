"""Bundled unit and entity lexicons.

The package ships a single JSON file with three sections: a unit table keyed by
canonical unit name (category, abbreviations, written-out expansion), a list of
person first names, and a list of place names. The unit table drives unit
detection, abbreviation expansion, and same-category replacement; the entity
lists drive person/place detection and replacement.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import LexiconError, SingletonCategory, UnknownUnit

CATEGORIES = ("Currency", "Length", "Time", "Weight", "Speed")

# units whose plural is not formed by appending "s"
_IRREGULAR_PLURALS = {"foot": "feet", "inch": "inches"}


def pluralize(word: str) -> str:
    if word in _IRREGULAR_PLURALS:
        return _IRREGULAR_PLURALS[word]
    return word + "s"


@dataclass(frozen=True)
class UnitEntry:
    name: str
    category: str
    abbrevs: tuple[str, ...]
    expansion: str


class UnitLexicon:
    """Lookup structure over the unit table.

    Abbreviations are matched case-insensitively against single tokens.
    Expansions (singular and plural, including multi-word ones such as
    "kilometre per hour") are matched against token sequences.
    """

    def __init__(self, entries: dict[str, UnitEntry]):
        self.entries = entries
        self.by_category: dict[str, list[str]] = {c: [] for c in CATEGORIES}
        for name in entries:
            self.by_category[entries[name].category].append(name)
        self.abbrev_to_name: dict[str, str] = {}
        for e in entries.values():
            for a in e.abbrevs:
                if a.lower() in self.abbrev_to_name:
                    raise LexiconError(f"duplicate abbreviation {a!r}")
                self.abbrev_to_name[a.lower()] = e.name
        # token-tuple of each expansion form -> (canonical name, plural flag)
        self.form_to_name: dict[tuple[str, ...], tuple[str, bool]] = {}
        for e in entries.values():
            words = e.expansion.lower().split()
            plural = [pluralize(words[0])] + words[1:]
            self.form_to_name[tuple(words)] = (e.name, False)
            self.form_to_name[tuple(plural)] = (e.name, True)
        self.max_form_len = max(len(k) for k in self.form_to_name)

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def entry(self, name: str) -> UnitEntry:
        if name not in self.entries:
            raise UnknownUnit(name)
        return self.entries[name]

    def expansion(self, name: str) -> str:
        return self.entry(name).expansion

    def primary_abbrev(self, name: str) -> str | None:
        e = self.entry(name)
        return e.abbrevs[0] if e.abbrevs else None

    def alternates(self, name: str) -> list[str]:
        """Same-category unit names other than `name`, in table order."""
        e = self.entry(name)
        return [n for n in self.by_category[e.category] if n != name]

    def sample_alternate(self, name: str, rng: np.random.Generator) -> str:
        alts = self.alternates(name)
        if not alts:
            raise SingletonCategory(
                f"{name} is the only {self.entry(name).category} unit")
        return alts[int(rng.integers(len(alts)))]


@dataclass(frozen=True)
class EntityLexicon:
    persons: tuple[str, ...]
    places: tuple[str, ...]

    def person_set(self) -> frozenset[str]:
        return frozenset(p.lower() for p in self.persons)

    def place_forms(self) -> dict[tuple[str, ...], str]:
        """Token-tuple (lowercased) of each place name -> canonical surface."""
        return {tuple(p.lower().split()): p for p in self.places}


@dataclass(frozen=True)
class Lexicon:
    units: UnitLexicon
    entities: EntityLexicon


def _validate(raw: dict) -> None:
    for key in ("units", "persons", "places"):
        if key not in raw:
            raise LexiconError(f"missing section {key!r}")
    for name, entry in raw["units"].items():
        if entry.get("category") not in CATEGORIES:
            raise LexiconError(f"unit {name!r} has bad category")
        if not entry.get("expansion"):
            raise LexiconError(f"unit {name!r} has empty expansion")
    counts = {c: 0 for c in CATEGORIES}
    for entry in raw["units"].values():
        counts[entry["category"]] += 1
    thin = [c for c, n in counts.items() if n < 2]
    if thin:
        raise LexiconError(f"categories with fewer than 2 units: {thin}")


def load_lexicon(path: str | None = None) -> Lexicon:
    """Load a lexicon file, defaulting to the bundled one."""
    if path is None:
        raw = json.loads(
            resources.files("paraqd").joinpath("data/lexicon.json").read_text())
    else:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    _validate(raw)
    entries = {
        name: UnitEntry(name, e["category"], tuple(e["abbrev"]), e["expansion"])
        for name, e in raw["units"].items()
    }
    return Lexicon(
        units=UnitLexicon(entries),
        entities=EntityLexicon(tuple(raw["persons"]), tuple(raw["places"])),
    )


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    return load_lexicon()
