"""Training-time augmentation operators and triplet assembly.

Ten operators generate paraphrases from an anchor question. The first four
preserve the quantities the question needs and are labelled 1 (valid); the
other six each break something essential (a key phrase, the final sentence, an
entity, a number, overall fidelity, or a unit) and are labelled 0. The label
is purely a function of which operator produced the pair, which is what makes
the data self-supervised. Triplets pair each anchor with one valid and one
broken paraphrase for contrastive training.

Randomized operators draw from a generator derived from (seed, question, op),
so adding or removing one operator never shifts another's draws, and excluding
an operator that never applied anyway reproduces the identical triplet set.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace as dc_replace

import numpy as np

from .encoder import EncoderModel, cossim, fnv1a64
from .errors import (NoEntities, NoNumbers, NoPhrases, NoUnits, OperatorSkip,
                     TooShort)
from .keyphrase import extract_candidates, top_k_candidates
from .lexicon import Lexicon, default_lexicon
from .provider import ProviderClient, StubProvider
from .text import (Question, normalize_space, number_to_words, replace_spans,
                   tokenize, unit_replacement_surface)

log = logging.getLogger(__name__)

POSITIVE_OPS = ("f1", "f2", "f3", "f4")
NEGATIVE_OPS = ("f5", "f6", "f7", "f8", "f9", "f10")
TRAIN_OPS = POSITIVE_OPS + NEGATIVE_OPS

NUMBER_FILLERS = ("some", "a few", "many", "a lot of", "")

DEFAULT_NUM_CANDIDATES = 6
DEFAULT_TOP_K = 10


def pair_label(op: str) -> int:
    """The labelling function: 1 for quantity-preserving ops, 0 otherwise."""
    if op in POSITIVE_OPS:
        return 1
    if op in NEGATIVE_OPS:
        return 0
    raise KeyError(f"not a training operator: {op}")


@dataclass(frozen=True)
class AugmentedPair:
    anchor: str
    paraphrase: str
    op: str
    label: int
    provenance: str = "rule"     # "rule", "stub", or "provider"

    def to_json(self) -> dict:
        return {"anchor": self.anchor, "paraphrase": self.paraphrase,
                "op": self.op, "label": self.label}


@dataclass(frozen=True)
class Triplet:
    anchor: str
    positive: str
    negative: str
    pos_op: str
    neg_op: str

    def to_json(self) -> dict:
        return {"anchor": self.anchor, "positive": self.positive,
                "negative": self.negative, "pos_op": self.pos_op,
                "neg_op": self.neg_op}


def token_levenshtein(a: list[str], b: list[str]) -> int:
    """Edit distance over token sequences."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ta in enumerate(a, start=1):
        cur = [i]
        for j, tb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1,
                           prev[j - 1] + (ta != tb)))
        prev = cur
    return prev[-1]


def derive_rng(seed: int, q: Question, op: str) -> np.random.Generator:
    qkey = fnv1a64((q.qid or q.text).encode("utf-8"))
    opkey = fnv1a64(op.encode("utf-8"))
    return np.random.default_rng([seed & 0xFFFFFFFF, qkey, opkey])


# ---------------------------------------------------------------------------
# positive operators

def f1_backtranslate(q: Question, provider: ProviderClient,
                     num_candidates: int = DEFAULT_NUM_CANDIDATES) -> str:
    """Round-trip each sentence through the provider and keep, per sentence,
    the candidate farthest from the source in token edit distance."""
    out = []
    for i in range(q.n_sentences):
        source = q.sentence_text(i)
        source_tokens = [t.surface for t in tokenize(source)]
        candidates = provider.transform("backtranslate", source,
                                        num_candidates=num_candidates)
        best = max(candidates, key=lambda c: token_levenshtein(
            source_tokens, [t.surface for t in tokenize(c)]))
        # max() keeps the first of tied candidates, matching the contract
        out.append(best)
    return " ".join(out)


def f2_identity(q: Question) -> str:
    return q.text


def f3_numbers_to_words(q: Question) -> str:
    edits = [(m.start, m.end, number_to_words(m.value)) for m in q.numbers]
    return replace_spans(q.text, edits)


def f4_expand_units(q: Question, lexicon: Lexicon | None = None) -> str:
    lexicon = lexicon or default_lexicon()
    edits = [(u.start, u.end, lexicon.units.expansion(u.name))
             for u in q.units if u.form == "abbreviated"]
    return replace_spans(q.text, edits)


# ---------------------------------------------------------------------------
# negative operators

def f5_phrase_delete(q: Question, encoder: EncoderModel,
                     k: int = DEFAULT_TOP_K) -> str:
    """Delete the ranked phrase whose removal moves the embedding least,
    which tends to be the one carrying the most question-critical content
    still leaving fluent text."""
    candidates = top_k_candidates(q, k)
    anchor_emb = encoder.embed(q.text)
    best_text, best_sim, best_offset = None, None, None
    for cand in candidates:
        variant = normalize_space(replace_spans(q.text, [(cand.start, cand.end, "")]))
        if not variant:
            continue
        sim = cossim(anchor_emb, encoder.embed(variant))
        if best_sim is None or sim < best_sim or (sim == best_sim
                                                  and cand.start < best_offset):
            best_text, best_sim, best_offset = variant, sim, cand.start
    if best_text is None:
        raise NoPhrases("no deletable phrase")
    return best_text


def f6_truncate(q: Question) -> str:
    """Drop the last sentence, or the last 3 tokens of a single-sentence
    question."""
    if q.n_sentences > 1:
        start = q.sentence_char_span(0)[0]
        end = q.sentence_char_span(q.n_sentences - 2)[1]
        return q.text[start:end]
    ts, te = q.sentences[0]
    if te - ts <= 3:
        raise TooShort("3 or fewer tokens")
    return q.text[q.tokens[ts].start:q.tokens[te - 4].end]


def f7_entity_edit(q: Question, rng: np.random.Generator,
                   lexicon: Lexicon | None = None,
                   choices: list[tuple[int, str, str | None]] | None = None) -> str:
    """Replace or delete 1 to min(3, k) entities, each by a fair coin.

    `choices` fixes the sampling for tests: (entity index, "replace"|"delete",
    replacement surface or None).
    """
    lexicon = lexicon or default_lexicon()
    if not q.entities:
        raise NoEntities(q.text)
    if choices is None:
        k = len(q.entities)
        w = int(rng.integers(1, min(3, k) + 1))
        picked = sorted(int(i) for i in rng.choice(k, size=w, replace=False))
        choices = []
        for i in picked:
            ent = q.entities[i]
            if rng.random() < 0.5:
                pool = (lexicon.entities.persons if ent.category == "Person"
                        else lexicon.entities.places)
                pool = [p for p in pool if p.lower() != ent.surface.lower()]
                choices.append((i, "replace", pool[int(rng.integers(len(pool)))]))
            else:
                choices.append((i, "delete", None))
    edits = []
    for i, action, replacement in choices:
        ent = q.entities[i]
        edits.append((ent.start, ent.end,
                      replacement if action == "replace" else ""))
    return normalize_space(replace_spans(q.text, edits))


def f8_number_delete(q: Question, rng: np.random.Generator,
                     numbers: list[int] | None = None,
                     filler: str | None = None) -> str:
    """Replace 1 or 2 numbers with one vague filler (possibly nothing)."""
    if not q.numbers:
        raise NoNumbers(q.text)
    if numbers is None:
        high = min(2, len(q.numbers))
        size = int(rng.integers(1, high + 1))
        numbers = sorted(int(i) for i in
                         rng.choice(len(q.numbers), size=size, replace=False))
    if filler is None:
        filler = NUMBER_FILLERS[int(rng.integers(len(NUMBER_FILLERS)))]
    edits = [(q.numbers[i].start, q.numbers[i].end, filler) for i in numbers]
    return normalize_space(replace_spans(q.text, edits))


def f9_lossy_paraphrase(q: Question, provider: ProviderClient) -> str:
    return provider.transform("pegasus", q.text)[0]


def f10_unit_swap(q: Question, rng: np.random.Generator,
                  lexicon: Lexicon | None = None,
                  choices: list[tuple[int, str]] | None = None) -> str:
    """Swap a random subset of units for different units of the same
    category, so the text stays plausible but the quantities change."""
    lexicon = lexicon or default_lexicon()
    eligible = [i for i, u in enumerate(q.units)
                if lexicon.units.alternates(u.name)]
    if not eligible:
        raise NoUnits(q.text)
    if choices is None:
        chosen: list[int] = []
        while not chosen:
            mask = rng.random(len(eligible)) < 0.5
            chosen = [i for i, m in zip(eligible, mask) if m]
        choices = []
        for i in chosen:
            alt = lexicon.units.sample_alternate(q.units[i].name, rng)
            choices.append((i, alt))
    edits = []
    for i, alt in choices:
        u = q.units[i]
        edits.append((u.start, u.end, unit_replacement_surface(u, alt, lexicon)))
    return replace_spans(q.text, edits)


# ---------------------------------------------------------------------------
# dispatch

@dataclass
class OpContext:
    provider: ProviderClient
    encoder: EncoderModel | None = None
    lexicon: Lexicon | None = None
    seed: int = 0
    num_candidates: int = DEFAULT_NUM_CANDIDATES
    top_k: int = DEFAULT_TOP_K

    def __post_init__(self):
        if self.lexicon is None:
            self.lexicon = default_lexicon()


def applicable(op: str, q: Question, ctx: OpContext) -> bool:
    """Cheap per-question applicability predicate; provider ops are assumed
    applicable and surface their own failures."""
    if op in ("f1", "f2", "f3", "f4", "f9"):
        return True
    if op == "f5":
        return len(extract_candidates(q)) > 0
    if op == "f6":
        if q.n_sentences > 1:
            return True
        ts, te = q.sentences[0]
        return te - ts > 3
    if op == "f7":
        return len(q.entities) > 0
    if op == "f8":
        return len(q.numbers) > 0
    if op == "f10":
        return any(ctx.lexicon.units.alternates(u.name) for u in q.units)
    raise KeyError(op)


def apply_operator(op: str, q: Question, ctx: OpContext) -> AugmentedPair:
    """Run one operator and wrap the output as a labelled pair."""
    rng = derive_rng(ctx.seed, q, op)
    provenance = "rule"
    if op == "f1":
        text = f1_backtranslate(q, ctx.provider, ctx.num_candidates)
    elif op == "f2":
        text = f2_identity(q)
    elif op == "f3":
        text = f3_numbers_to_words(q)
    elif op == "f4":
        text = f4_expand_units(q, ctx.lexicon)
    elif op == "f5":
        if ctx.encoder is None:
            raise ValueError("f5 needs an encoder snapshot")
        text = f5_phrase_delete(q, ctx.encoder, ctx.top_k)
    elif op == "f6":
        text = f6_truncate(q)
    elif op == "f7":
        text = f7_entity_edit(q, rng, ctx.lexicon)
    elif op == "f8":
        text = f8_number_delete(q, rng)
    elif op == "f9":
        text = f9_lossy_paraphrase(q, ctx.provider)
    elif op == "f10":
        text = f10_unit_swap(q, rng, ctx.lexicon)
    else:
        raise KeyError(op)
    if op in ("f1", "f9"):
        provenance = "stub" if isinstance(ctx.provider, StubProvider) else "provider"
    if not text.strip():
        raise OperatorSkip(f"{op} produced empty text")
    return AugmentedPair(q.text, text, op, pair_label(op), provenance)


def augment_corpus(corpus: list[Question], ctx: OpContext,
                   ops: tuple[str, ...] = TRAIN_OPS) -> list[AugmentedPair]:
    """All applicable operators applied to every question."""
    pairs = []
    for q in corpus:
        for op in ops:
            if not applicable(op, q, ctx):
                continue
            try:
                pairs.append(apply_operator(op, q, ctx))
            except OperatorSkip as exc:
                log.warning("skipping %s on %r: %s", op, q.text[:40], exc)
    return pairs


def build_triplets(corpus: list[Question], ctx: OpContext,
                   strategy: str = "sample-one",
                   allowed_pos: tuple[str, ...] = POSITIVE_OPS,
                   allowed_neg: tuple[str, ...] = NEGATIVE_OPS
                   ) -> tuple[list[Triplet], list[str]]:
    """Anchor/positive/negative triplets for the corpus.

    "sample-one" draws one applicable operator per polarity per question;
    "enumerate-all" emits every applicable combination. Questions with no
    applicable negative operator are dropped and reported in the second
    return value.
    """
    if strategy not in ("sample-one", "enumerate-all"):
        raise ValueError(f"unknown strategy {strategy!r}")
    triplets: list[Triplet] = []
    dropped: list[str] = []
    for q in corpus:
        pos_ok = [op for op in allowed_pos if applicable(op, q, ctx)]
        neg_ok = [op for op in allowed_neg if applicable(op, q, ctx)]
        if not pos_ok or not neg_ok:
            dropped.append(q.qid or q.text)
            log.warning("no applicable operator pair for %r", q.text[:60])
            continue
        if strategy == "sample-one":
            sel = derive_rng(ctx.seed, q, "select")
            made = _sample_one(q, ctx, sel, list(pos_ok), list(neg_ok))
            if made is None:
                dropped.append(q.qid or q.text)
            else:
                triplets.append(made)
        else:
            pos_pairs, neg_pairs = [], []
            for op in pos_ok:
                try:
                    pos_pairs.append(apply_operator(op, q, ctx))
                except OperatorSkip:
                    pass
            for op in neg_ok:
                try:
                    neg_pairs.append(apply_operator(op, q, ctx))
                except OperatorSkip:
                    pass
            if not pos_pairs or not neg_pairs:
                dropped.append(q.qid or q.text)
                continue
            for pp in pos_pairs:
                for np_ in neg_pairs:
                    triplets.append(Triplet(q.text, pp.paraphrase, np_.paraphrase,
                                            pp.op, np_.op))
    return triplets, dropped


def _sample_one(q: Question, ctx: OpContext, sel: np.random.Generator,
                pos_ok: list[str], neg_ok: list[str]) -> Triplet | None:
    pos_pair = None
    while pos_ok and pos_pair is None:
        op = pos_ok.pop(int(sel.integers(len(pos_ok))))
        try:
            pos_pair = apply_operator(op, q, ctx)
        except OperatorSkip:
            continue
    neg_pair = None
    while neg_ok and neg_pair is None:
        op = neg_ok.pop(int(sel.integers(len(neg_ok))))
        try:
            neg_pair = apply_operator(op, q, ctx)
        except OperatorSkip:
            continue
    if pos_pair is None or neg_pair is None:
        log.warning("all operators skipped for %r", q.text[:60])
        return None
    return Triplet(q.text, pos_pair.paraphrase, neg_pair.paraphrase,
                   pos_pair.op, neg_pair.op)


# ---------------------------------------------------------------------------
# baselines

def build_baseline_pairs(corpus: list[Question], method: str, ctx: OpContext,
                         n_replace: int = 2) -> list[AugmentedPair]:
    """Pairs for the consistency-training and manifold baselines.

    Both emit positively labelled pairs only; negatives come from other
    in-batch questions at training time (see `pairs_to_inbatch_triplets`).
    """
    from .tfidf import TfidfIndex

    pairs = []
    if method == "uda":
        index = TfidfIndex.from_questions(corpus)
        for q in corpus:
            bt = f1_backtranslate(q, ctx.provider, ctx.num_candidates)
            pairs.append(AugmentedPair(q.text, bt, "uda_bt", 1,
                                       "stub" if isinstance(ctx.provider, StubProvider)
                                       else "provider"))
            rng = derive_rng(ctx.seed, q, "uda_tfidf")
            replaced = index.replace_scored_words(q, n_replace, rng, lowest=True)
            pairs.append(AugmentedPair(q.text, replaced, "uda_tfidf", 1, "rule"))
    elif method == "ssmba":
        for q in corpus:
            out = ctx.provider.transform("mlm_fill", q.text, mask_rate=0.15,
                                         seed=ctx.seed)[0]
            pairs.append(AugmentedPair(q.text, out, "ssmba_mlm", 1,
                                       "stub" if isinstance(ctx.provider, StubProvider)
                                       else "provider"))
    else:
        raise ValueError(f"unknown baseline {method!r}")
    return pairs


def pairs_to_inbatch_triplets(pairs: list[AugmentedPair],
                              seed: int = 0) -> list[Triplet]:
    """Use the next shuffled pair's anchor as each pair's negative."""
    if len(pairs) < 2:
        raise ValueError("need at least 2 pairs for in-batch negatives")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pairs))
    shuffled = [pairs[i] for i in order]
    out = []
    for i, p in enumerate(shuffled):
        neg = shuffled[(i + 1) % len(shuffled)].anchor
        out.append(Triplet(p.anchor, p.paraphrase, neg, p.op, "in_batch"))
    return out


# ---------------------------------------------------------------------------
# pseudo-labelling

def pseudo_label_scores(scores: list[float], iota: float = 0.8) -> list[int]:
    """1 where the score clears the threshold, 0 at or below it."""
    return [1 if s > iota else 0 for s in scores]


def pseudo_label(pairs: list[AugmentedPair], model: EncoderModel,
                 iota: float = 0.8) -> tuple[list[AugmentedPair], dict]:
    """Relabel pairs by thresholded similarity under the given encoder."""
    from .encoder import score as model_score

    scores = [model_score(model, p.anchor, p.paraphrase) for p in pairs]
    labels = pseudo_label_scores(scores, iota)
    relabeled = [dc_replace(p, label=lab) for p, lab in zip(pairs, labels)]
    n = len(pairs)
    pos_pct = 100.0 * sum(labels) / n if n else 0.0
    summary = {"positive_pct": round(pos_pct, 2),
               "negative_pct": round(100.0 - pos_pct, 2) if n else 0.0}
    return relabeled, summary


# ---------------------------------------------------------------------------
# JSONL wire formats

def write_triplets(path: str, triplets: list[Triplet]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in triplets:
            f.write(json.dumps(t.to_json(), ensure_ascii=False) + "\n")


def read_triplets(path: str) -> list[Triplet]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                d = json.loads(line)
                out.append(Triplet(d["anchor"], d["positive"], d["negative"],
                                   d["pos_op"], d["neg_op"]))
    return out


def write_pairs(path: str, pairs: list[AugmentedPair]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in pairs:
            f.write(json.dumps(p.to_json(), ensure_ascii=False) + "\n")


def read_pairs(path: str) -> list[AugmentedPair]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                d = json.loads(line)
                out.append(AugmentedPair(d["anchor"], d["paraphrase"],
                                         d["op"], d["label"]))
    return out
