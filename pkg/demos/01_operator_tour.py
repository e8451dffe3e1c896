"""A tour of the paraphrase operators.

Walks one algebra word problem through every training operator (f1-f10) and
every held-out test operator (fa-fe), printing the rewritten text and the
label each operator assigns. Run from the repo root:

    python3 demos/01_operator_tour.py
"""
import numpy as np

from paraqd.augment import (TRAIN_OPS, OpContext, applicable, apply_operator)
from paraqd.encoder import EncoderModel
from paraqd.lexicon import default_lexicon
from paraqd.provider import StubProvider
from paraqd.testset import TEST_OPS, apply_test_operator
from paraqd.text import analyze
from paraqd.tfidf import TfidfIndex

QUESTION = ("Alex travelled 100 km from New York at a constant speed of "
            "20 kmph. How many hours did it take him in total?")

lexicon = default_lexicon()
q = analyze(QUESTION, lexicon, qid="demo-0")

print("anchor:", q.text)
print()
print(f"parsed: {len(q.tokens)} tokens, "
      f"numbers={[m.surface for m in q.numbers]}, "
      f"units={[(u.surface, u.category) for u in q.units]}, "
      f"entities={[(e.surface, e.category) for e in q.entities]}")
print()

# ---------------------------------------------------------------------------
# Training operators. The first four preserve the problem (label 1), the
# rest break it in a targeted way (label 0). Everything is seeded, so this
# script prints the same rewrites every run.

ctx = OpContext(provider=StubProvider(),
                encoder=EncoderModel.init(d=64, n_buckets=1 << 14, seed=0),
                lexicon=lexicon, seed=11)

print("== training operators ==")
for op in TRAIN_OPS:
    if not applicable(op, q, ctx):
        print(f"{op:>4}  (not applicable)")
        continue
    pair = apply_operator(op, q, ctx)
    print(f"{op:>4}  label={pair.label}  {pair.paraphrase}")
print()

# ---------------------------------------------------------------------------
# Held-out test operators: built from different mechanics than the training
# ten, so a trained scorer has to generalize to them. fc needs a document
# frequency index to know which words are informative.

corpus = [q, analyze("Sara bought 6 pens for 18 dollars. How many cents "
                     "does one pen cost?", lexicon, qid="demo-1")]
index = TfidfIndex.from_questions(corpus)

print("== held-out test operators ==")
for op in TEST_OPS:
    pair = apply_test_operator(op, q, ctx.provider, index=index, seed=3)
    print(f"{op:>4}  intended={pair.intended}  {pair.paraphrase}")
