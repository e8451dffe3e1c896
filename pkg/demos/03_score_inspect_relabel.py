"""Use a trained scorer: judge rewrites, inspect questions, relabel noisy pairs.

    python3 demos/03_score_inspect_relabel.py
"""
import numpy as np

from paraqd.augment import (OpContext, augment_corpus, build_triplets,
                            pseudo_label)
from paraqd.corpus import synth_corpus
from paraqd.encoder import EncoderModel, score
from paraqd.evaluation import export_embeddings, pca_2d
from paraqd.keyphrase import top_k_phrases
from paraqd.lexicon import default_lexicon
from paraqd.provider import StubProvider
from paraqd.text import analyze
from paraqd.training import TrainConfig, train

lexicon = default_lexicon()

# ---------------------------------------------------------------------------
# 1. A quick model. Forty questions and three epochs are enough for a
#    usable scorer at demo scale.

corpus = synth_corpus(40, seed=0, lexicon=lexicon)
ctx = OpContext(StubProvider(), EncoderModel.init(128, 1 << 16, seed=1),
                lexicon=lexicon, seed=11)
triplets, _ = build_triplets(corpus, ctx, strategy="enumerate-all")
model = EncoderModel.init(128, 1 << 16, seed=3407)
train(model, triplets, TrainConfig(epochs=3, seed=3407))

# ---------------------------------------------------------------------------
# 2. Judge hand-written rewrites of a fresh question. Scores are cosines in
#    [-1, 1]; at the default threshold 0.5, above = valid paraphrase.

anchor = ("Maya saves 45 rupees every week. "
          "How many rupees does Maya save in 12 weeks?")
candidates = [
    ("Maya sets aside 45 rupees weekly. How many rupees "
     "does Maya save in 12 weeks?", "light rewording"),
    ("Maya saves forty five rupees every week. How many rupees "
     "does Maya save in twelve weeks?", "numbers spelled out"),
    ("Maya saves 45 rupees every week.", "question dropped"),
    ("Maya saves some rupees every week. How many rupees "
     "does Maya save in some weeks?", "numbers deleted"),
]
print("anchor:", anchor)
for text, why in candidates:
    s = score(model, anchor, text)
    verdict = "valid  " if s > 0.5 else "invalid"
    print(f"  {s:6.3f}  {verdict}  ({why})")

# ---------------------------------------------------------------------------
# 3. What is the question about? Topic-ranked keyphrases of the anchor.

q = analyze(anchor, lexicon)
print("\nkeyphrases:", ", ".join(top_k_phrases(q, k=3)))

# ---------------------------------------------------------------------------
# 4. Pseudo-labelling: take operator pairs, throw the labels away, and let
#    the scorer re-decide at the stricter threshold iota=0.8.

pairs = augment_corpus(corpus[:10], ctx)
relabelled, summary = pseudo_label(pairs, model, iota=0.8)
agree = sum(a.label == b.label for a, b in zip(pairs, relabelled))
print(f"\npseudo-labels: {summary['positive_pct']}% positive, "
      f"{summary['negative_pct']}% negative; "
      f"{agree}/{len(pairs)} agree with the operator labels")

# ---------------------------------------------------------------------------
# 5. The learned geometry, projected to 2 dimensions: positives should sit
#    near their anchors, negatives pushed away.

X = np.array([model.embed(t)
              for tr in triplets[:40]
              for t in (tr.anchor, tr.positive, tr.negative)])
proj, _ = pca_2d(X)
roles = ("anchor", "positive", "negative")
print("\nmean 2d distance from anchor:")
for k, role in enumerate(roles[1:], start=1):
    d = np.linalg.norm(proj[k::3] - proj[0::3], axis=1).mean()
    print(f"  {role:>8}: {d:.3f}")
