"""Corpus-level TF-IDF scoring shared by the word-replacement transforms.

Terms are lowercased alphabetic tokens; a term's score within one question is
its raw count there times ln(N / document frequency). Numbers and punctuation
never enter the index, so they can never be selected for replacement.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import EmptyVocabulary
from .text import Question, STOPWORDS, replace_spans


class TfidfIndex:
    def __init__(self, df: dict[str, int], n_docs: int):
        if not df:
            raise EmptyVocabulary("corpus has no word tokens")
        self.df = df
        self.n_docs = n_docs
        self.vocabulary = sorted(df)

    @classmethod
    def from_questions(cls, corpus: list[Question]) -> "TfidfIndex":
        df: dict[str, int] = {}
        for q in corpus:
            for term in {t.surface.lower() for t in q.tokens if t.surface.isalpha()}:
                df[term] = df.get(term, 0) + 1
        return cls(df, len(corpus))

    def scores(self, q: Question) -> dict[str, float]:
        """Per-term score within `q`; terms unseen at index time are omitted."""
        tf: dict[str, int] = {}
        for t in q.tokens:
            w = t.surface.lower()
            if w.isalpha() and w in self.df:
                tf[w] = tf.get(w, 0) + 1
        return {w: c * math.log(self.n_docs / self.df[w]) for w, c in tf.items()}

    def _ordered_terms(self, q: Question, lowest: bool,
                       content_only: bool) -> list[str]:
        scored = self.scores(q)
        if content_only:
            scored = {w: s for w, s in scored.items() if w not in STOPWORDS}
        first_seen = {}
        for i, t in enumerate(q.tokens):
            w = t.surface.lower()
            if w in scored and w not in first_seen:
                first_seen[w] = i
        sign = 1.0 if lowest else -1.0
        return sorted(scored, key=lambda w: (sign * scored[w], first_seen[w]))

    def top_words(self, q: Question, m: int) -> list[str]:
        """The m highest-scoring content words, score ties broken by first
        occurrence."""
        return self._ordered_terms(q, lowest=False, content_only=True)[:m]

    def bottom_words(self, q: Question, m: int) -> list[str]:
        """The m lowest-scoring words, stopwords included; these carry the
        least identifying content."""
        return self._ordered_terms(q, lowest=True, content_only=False)[:m]

    def replace_scored_words(self, q: Question, m: int,
                             rng: np.random.Generator,
                             lowest: bool = False) -> str:
        """Replace every occurrence of the m selected words with random
        vocabulary words (one draw per word type, never the word itself)."""
        if m <= 0:
            return q.text
        targets = (self.bottom_words if lowest else self.top_words)(q, m)
        replacement_for = {}
        for w in targets:
            pick = self.vocabulary[int(rng.integers(len(self.vocabulary)))]
            if pick == w:
                pick = self.vocabulary[(self.vocabulary.index(pick) + 1)
                                       % len(self.vocabulary)]
            replacement_for[w] = pick
        edits = []
        for t in q.tokens:
            w = t.surface.lower()
            if w in replacement_for:
                new = replacement_for[w]
                if t.surface[:1].isupper():
                    new = new[:1].upper() + new[1:]
                edits.append((t.start, t.end, new))
        return replace_spans(q.text, edits)
