"""Train the scorer and watch valid/invalid paraphrases separate.

Small-scale version of the full pipeline: synthesize a corpus, build
anchor/positive/negative triplets with the offline stub provider, fit the
hashed n-gram encoder with the triplet objective, then score held-out
questions the model never saw. Takes ~15 s on a laptop CPU.

    python3 demos/02_train_and_separate.py
"""
import numpy as np

from paraqd.augment import OpContext, augment_corpus, build_triplets
from paraqd.corpus import synth_corpus
from paraqd.encoder import EncoderModel
from paraqd.evaluation import evaluate
from paraqd.lexicon import default_lexicon
from paraqd.provider import StubProvider
from paraqd.training import TrainConfig, train

lexicon = default_lexicon()

# ---------------------------------------------------------------------------
# 1. Data. 80 training questions, 20 held out. The auxiliary encoder inside
#    the context only guides f5's choice of which phrase to delete.

corpus = synth_corpus(80, seed=0, lexicon=lexicon)
held = synth_corpus(20, seed=77, lexicon=lexicon)
ctx = OpContext(StubProvider(), EncoderModel.init(128, 1 << 16, seed=1),
                lexicon=lexicon, seed=11)

triplets, dropped = build_triplets(corpus, ctx, strategy="enumerate-all")
print(f"{len(triplets)} triplets from {len(corpus)} questions "
      f"({len(dropped)} dropped)")

# ---------------------------------------------------------------------------
# 2. Train. Char n-gram hashing + a bucket embedding table; the triplet
#    hinge pushes each anchor toward its valid rewrite and away from the
#    broken one by the margin.

model = EncoderModel.init(d=128, n_buckets=1 << 16, seed=3407)
untrained = EncoderModel.init(d=128, n_buckets=1 << 16, seed=3407)

config = TrainConfig(epochs=6, batch_size=16, seed=3407)
report = train(model, triplets, config)
print(f"trained {report.steps} steps in {report.wall_time_s:.1f}s; "
      f"epoch losses: {[round(x, 4) for x in report.per_epoch_loss]}")

# ---------------------------------------------------------------------------
# 3. Score held-out pairs. mu_pos / mu_neg are the mean cosine scores of
#    valid / invalid pairs; their gap mu_sep is the headline number.

eval_ctx = OpContext(StubProvider(), EncoderModel.init(128, 1 << 16, seed=1),
                     lexicon=lexicon, seed=99)
pairs = augment_corpus(held, eval_ctx)

for name, m in (("untrained", untrained), ("trained", model)):
    r = evaluate(m, pairs, tau=0.5)
    print(f"{name:>9}: mu_pos={r.mu_pos:.3f} mu_neg={r.mu_neg:.3f} "
          f"mu_sep={r.mu_sep:.3f} weighted_f1={r.weighted['f1']:.3f}")

# ---------------------------------------------------------------------------
# 4. Which operators are hardest? Low mean score on a positive op (or high
#    on a negative op) marks the confusable rewrites.

r = evaluate(model, pairs, tau=0.5)
print("\nper-operator mean score (trained):")
for op, row in sorted(r.per_op.items()):
    bar = "#" * int(round(20 * max(0.0, min(1.0, row["mean_score"]))))
    print(f"  {op:>4} {row['mean_score']:6.3f} {bar}")
