"""TF-IDF index tests against a 3-document hand-computed oracle."""
import math

import numpy as np
import pytest

from paraqd.errors import EmptyVocabulary
from paraqd.text import analyze, tokenize
from paraqd.tfidf import TfidfIndex

D1 = "Tom walked home. How far did Tom walk?"
D2 = "Sarah walked to school. How long?"
D3 = "The dog barked. Why did the dog bark?"

# per-document *presence* counts, tallied by hand
DF = {"tom": 1, "walked": 2, "home": 1, "how": 2, "far": 1, "did": 2,
      "walk": 1, "sarah": 1, "to": 1, "school": 1, "long": 1, "the": 1,
      "dog": 1, "barked": 1, "why": 1, "bark": 1}


@pytest.fixture(scope="module")
def docs(lexicon):
    return [analyze(t, lexicon) for t in (D1, D2, D3)]


@pytest.fixture(scope="module")
def index(docs):
    return TfidfIndex.from_questions(docs)


def test_document_frequencies(index):
    assert index.df == DF
    assert index.n_docs == 3
    assert index.vocabulary == sorted(DF)


def test_scores_hand_oracle(index, docs):
    # D1 term counts: tom appears twice, everything else once
    expected = {w: math.log(3 / DF[w]) for w in
                ("tom", "walked", "home", "how", "far", "did", "walk")}
    expected["tom"] *= 2
    got = index.scores(docs[0])
    assert set(got) == set(expected)
    for w, s in expected.items():
        assert got[w] == pytest.approx(s, abs=1e-12)


def test_scores_omit_unindexed_terms(docs):
    partial = TfidfIndex.from_questions(docs[:2])
    # of D3's words, only "did" was seen by the 2-document index
    assert set(partial.scores(docs[2])) == {"did"}


def test_top_word_is_repeated_rare_term(index, docs):
    # tom: 2 * ln 3 strictly dominates; next ln-3 content word by first
    # occurrence is "home"
    assert index.top_words(docs[0], 1) == ["tom"]
    assert index.top_words(docs[0], 2) == ["tom", "home"]


def test_bottom_words_tie_break_by_occurrence(index, docs):
    # walked/how/did all score ln 1.5; first occurrence orders them
    assert index.bottom_words(docs[0], 3) == ["walked", "how", "did"]


def test_replace_zero_is_identity(index, docs, rng):
    assert index.replace_scored_words(docs[0], 0, rng) == D1


def test_replace_hits_every_occurrence(index, docs):
    rng = np.random.default_rng(3)
    out = index.replace_scored_words(docs[0], 1, rng)
    new_tokens = [t.surface for t in tokenize(out)]
    old_tokens = [t.surface for t in tokenize(D1)]
    assert len(new_tokens) == len(old_tokens)
    changed = [(o, n) for o, n in zip(old_tokens, new_tokens) if o != n]
    # both occurrences of the top word replaced by one consistent pick
    assert [o for o, _ in changed] == ["Tom", "Tom"]
    picks = {n for _, n in changed}
    assert len(picks) == 1
    pick = picks.pop()
    assert pick[:1].isupper()           # case carried over
    assert pick.lower() in index.vocabulary
    assert pick.lower() != "tom"


def test_replace_deterministic(index, docs):
    a = index.replace_scored_words(docs[0], 2, np.random.default_rng(9))
    b = index.replace_scored_words(docs[0], 2, np.random.default_rng(9))
    assert a == b


def test_empty_vocabulary_rejected(lexicon):
    numbers_only = analyze("100 200?", lexicon)
    with pytest.raises(EmptyVocabulary):
        TfidfIndex.from_questions([numbers_only])
