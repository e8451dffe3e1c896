"""Held-out evaluation operators, disjoint from the training ones.

Two transforms are meant to preserve validity (voice change with grammar
cleanup, corruption followed by reconstruction) and three to break it
(informative-word replacement, random token deletion, detail-dropping
paraphrase). A built test set pairs every question with one operator of each
intended polarity so classifier quality can be read off directly.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .augment import derive_rng
from .errors import ProviderUnavailable
from .provider import ProviderClient
from .text import Question, normalize_space, replace_spans
from .tfidf import TfidfIndex

log = logging.getLogger(__name__)

TEST_OPS = ("fa", "fb", "fc", "fd", "fe")
VALID_TEST_OPS = ("fa", "fb")
INVALID_TEST_OPS = ("fc", "fd", "fe")

DEFAULT_DELETE_RATE = 0.15

# corruption knobs for fb and its replacement word pool
CORRUPT_SHUFFLE_RATE = 0.2
CORRUPT_DELETE_RATE = 0.1
CORRUPT_REPLACE_RATE = 0.1
CORRUPT_WORDS = ("paper", "stone", "candle", "wagon", "meadow", "copper",
                 "lantern", "harbor", "pencil", "ribbon")


def intended_label(op: str) -> int:
    if op in VALID_TEST_OPS:
        return 1
    if op in INVALID_TEST_OPS:
        return 0
    raise KeyError(f"not a test operator: {op}")


@dataclass(frozen=True)
class TestPair:
    anchor: str
    paraphrase: str
    op: str
    intended: int
    human_label: int | None = None

    def to_json(self) -> dict:
        return {"anchor": self.anchor, "paraphrase": self.paraphrase,
                "op": self.op, "intended": self.intended,
                "human_label": self.human_label}


# ---------------------------------------------------------------------------
# operators

def fa_voice_change(q: Question, provider: ProviderClient) -> str:
    """Active-to-passive rewrite followed by a grammar cleanup pass."""
    passive = provider.transform("passive", q.text)[0]
    return provider.transform("grammar", passive)[0]


def corrupt_tokens(q: Question, rng: np.random.Generator,
                   shuffle_rate: float = CORRUPT_SHUFFLE_RATE,
                   delete_rate: float = CORRUPT_DELETE_RATE,
                   replace_rate: float = CORRUPT_REPLACE_RATE
                   ) -> tuple[list[str], list[int]]:
    """Corrupt a question at token level, sparing what scoring relies on.

    Number tokens, unit-mention tokens, and the final 3 tokens are kept
    verbatim and in place. Returns surviving surfaces plus each one's
    original token index.
    """
    n = len(q.tokens)
    protected = set(range(max(0, n - 3), n))
    for m in q.numbers:
        protected.add(m.tok)
    for u in q.units:
        protected.update(range(u.tok_start, u.tok_end))

    kept: list[tuple[int, str]] = []
    for i, tok in enumerate(q.tokens):
        if i in protected:
            kept.append((i, tok.surface))
            continue
        if rng.random() < delete_rate:
            continue
        surface = tok.surface
        if rng.random() < replace_rate:
            word = CORRUPT_WORDS[int(rng.integers(len(CORRUPT_WORDS)))]
            surface = word[:1].upper() + word[1:] if surface[:1].isupper() else word
        kept.append((i, surface))

    chosen = [j for j, (i, _) in enumerate(kept)
              if i not in protected and rng.random() < shuffle_rate]
    if len(chosen) > 1:
        # tokens move with their original index, so sorting the output by
        # index undoes exactly the reordering
        perm = rng.permutation(len(chosen))
        items = [kept[j] for j in chosen]
        for slot, src in zip(chosen, perm):
            kept[slot] = items[src]
    return [s for _, s in kept], [i for i, _ in kept]


def fb_reconstruct(q: Question, provider: ProviderClient,
                   rng: np.random.Generator, **rates) -> str:
    """Corrupt the question, then have the provider repair it."""
    surfaces, order = corrupt_tokens(q, rng, **rates)
    corrupted = " ".join(surfaces)
    return provider.transform("csr", corrupted, order=order)[0]


def fc_replace_informative(q: Question, index: TfidfIndex,
                           rng: np.random.Generator, m: int = 2) -> str:
    """Swap out the words TF-IDF says identify this question."""
    return index.replace_scored_words(q, m, rng, lowest=False)


def fd_delete_tokens(q: Question, rng: np.random.Generator,
                     rate: float = DEFAULT_DELETE_RATE) -> str:
    """Independently delete tokens at `rate`, always deleting at least one.

    rate 0 is the boundary case: exactly one uniformly chosen token goes.
    """
    n = len(q.tokens)
    if rate <= 0.0:
        drop = {int(rng.integers(n))}
    else:
        drop = set()
        for _ in range(1000):
            mask = rng.random(n) < rate
            if mask.any():
                drop = {i for i in range(n) if mask[i]}
                break
        else:
            drop = {int(rng.integers(n))}
    edits = [(q.tokens[i].start, q.tokens[i].end, "") for i in sorted(drop)]
    return normalize_space(replace_spans(q.text, edits))


def fe_drop_detail(q: Question, provider: ProviderClient) -> str:
    """Provider paraphrase that loses a detail (the stub drops the first
    number, falling back to truncation)."""
    return provider.transform("t5_qqp", q.text)[0]


# ---------------------------------------------------------------------------
# building

def apply_test_operator(op: str, q: Question, provider: ProviderClient,
                        index: TfidfIndex | None, seed: int) -> TestPair:
    rng = derive_rng(seed, q, op)
    if op == "fa":
        text = fa_voice_change(q, provider)
    elif op == "fb":
        text = fb_reconstruct(q, provider, rng)
    elif op == "fc":
        if index is None:
            raise ValueError("fc needs a TF-IDF index")
        text = fc_replace_informative(q, index, rng)
    elif op == "fd":
        text = fd_delete_tokens(q, rng)
    elif op == "fe":
        text = fe_drop_detail(q, provider)
    else:
        raise KeyError(op)
    return TestPair(q.text, text, op, intended_label(op))


def build_testset(corpus: list[Question], provider: ProviderClient,
                  seed: int = 0) -> list[TestPair]:
    """Two pairs per question: one intended-valid op, one intended-invalid.

    Pairs whose provider call fails are skipped with a warning rather than
    failing the whole build.
    """
    index = TfidfIndex.from_questions(corpus)
    out = []
    for q in corpus:
        sel = derive_rng(seed, q, "test-select")
        chosen = (VALID_TEST_OPS[int(sel.integers(len(VALID_TEST_OPS)))],
                  INVALID_TEST_OPS[int(sel.integers(len(INVALID_TEST_OPS)))])
        for op in chosen:
            try:
                out.append(apply_test_operator(op, q, provider, index, seed))
            except ProviderUnavailable as exc:
                log.warning("provider failed for %s on %r: %s",
                            op, q.text[:40], exc)
    return out


def write_test_pairs(path: str, pairs: list[TestPair]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in pairs:
            f.write(json.dumps(p.to_json(), ensure_ascii=False) + "\n")


def read_test_pairs(path: str) -> list[TestPair]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                d = json.loads(line)
                out.append(TestPair(d["anchor"], d["paraphrase"], d["op"],
                                    d["intended"], d.get("human_label")))
    return out
