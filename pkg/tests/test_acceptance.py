"""Acceptance gates.

Each test here is one release gate: it verifies a guarantee the library
commits to, at its stated tolerance and runtime budget, and prints a single
[acceptance] PASS/FAIL line (visible under -s, or in captured output).
Helpers are imported from the per-module test files so every gate checks the
implementation against an independently written oracle.
"""
import json
import os
import subprocess
import sys
import time
import warnings
from collections import Counter

import numpy as np
import pytest

from paraqd.augment import (TRAIN_OPS, AugmentedPair, OpContext, applicable,
                            apply_operator, augment_corpus, build_triplets,
                            f3_numbers_to_words, f4_expand_units, f6_truncate,
                            f8_number_delete, f10_unit_swap, pair_label,
                            pseudo_label, pseudo_label_scores)
from paraqd.corpus import synth_corpus
from paraqd.encoder import EncoderModel, score
from paraqd.evaluation import compute_metrics, evaluate
from paraqd.keyphrase import cluster_candidates, extract_candidates, top_k_phrases
from paraqd.provider import StubProvider
from paraqd.testset import build_testset, fb_reconstruct
from paraqd.text import analyze, is_number_surface, number_to_words, tokenize
from paraqd.training import TrainConfig, gradient_check, train

from test_augment import (contiguous_token_deletion, entity_edit_certificate,
                          number_delete_certificate, unit_swap_certificate)
from test_evaluation import reference_metrics, sweep_assignments
from test_keyphrase import FIXTURE as KEYPHRASE_FIXTURE
from test_keyphrase import _brute_force_pagerank
from test_testset import _is_subsequence, _protected_indices
from test_training import _planted_model

pytestmark = pytest.mark.usefixtures("_no_provider_env")


@pytest.fixture
def _no_provider_env(monkeypatch):
    monkeypatch.delenv("PARAQD_PROVIDER", raising=False)


def gate(name, fn, budget_s=None, carried_s=0.0):
    """Run one gate body; enforce its runtime budget; print the verdict."""
    t0 = time.perf_counter()
    try:
        fn()
        elapsed = time.perf_counter() - t0 + carried_s
        assert budget_s is None or elapsed < budget_s, \
            f"{name}: runtime {elapsed:.1f}s exceeds {budget_s:.0f}s budget"
    except BaseException:
        print(f"[acceptance] {name}: FAIL", flush=True)
        raise
    print(f"[acceptance] {name}: PASS ({elapsed:.1f}s)", flush=True)


def _norm(s: str) -> str:
    return " ".join(s.split())


# -- gate 1: pinned operator outputs ----------------------------------------

def test_operator_fidelity(q0, lexicon):
    def body():
        expected = {
            f3_numbers_to_words(q0): (
                "Alex travelled one hundred km from New York at a constant "
                "speed of twenty kmph. How many hours did it take him in "
                "total?"),
            f4_expand_units(q0, lexicon): (
                "Alex travelled 100 kilometre from New York at a constant "
                "speed of 20 kilometre per hour. How many hours did it take "
                "him in total?"),
            f6_truncate(q0): (
                "Alex travelled 100 km from New York at a constant speed of "
                "20 kmph."),
            f8_number_delete(q0, None, numbers=[0, 1], filler="some"): (
                "Alex travelled some km from New York at a constant speed "
                "of some kmph. How many hours did it take him in total?"),
            f10_unit_swap(q0, None, lexicon, choices=[(0, "m")]): (
                "Alex travelled 100 m from New York at a constant speed of "
                "20 kmph. How many hours did it take him in total?"),
        }
        for got, want in expected.items():
            assert _norm(got) == _norm(want)

    gate("operator-fidelity", body, budget_s=1.0)


# -- gate 2: operator invariants at corpus scale -----------------------------

def _positive_preserves_content(q, op, out, expansions):
    """Positive rewrites must keep every number and unit recoverable."""
    out_tokens = [t.surface for t in tokenize(out)]
    anchor_digits = Counter(t.surface for t in q.tokens
                            if is_number_surface(t.surface))
    out_digits = Counter(t for t in out_tokens if is_number_surface(t))
    if op == "f3":
        if out_digits:
            return False
        if not all(number_to_words(m.surface) in out for m in q.numbers):
            return False
    elif out_digits != anchor_digits:
        return False
    for u in q.units:
        if op == "f4" and u.form == "abbreviated":
            if expansions[u.name] not in out:
                return False
        elif " " in u.surface:
            if u.surface not in out:
                return False
        elif out_tokens.count(u.surface) < sum(
                1 for v in q.units if v.surface == u.surface):
            return False
    return True


def test_operator_invariant_suite(lexicon):
    def body():
        corpus = synth_corpus(1000, seed=13, lexicon=lexicon)
        ctx = OpContext(StubProvider(), EncoderModel.init(32, 1 << 12, seed=21),
                        lexicon=lexicon, seed=17)
        expansions = {u.name: lexicon.units.expansion(u.name)
                      for q in corpus for u in q.units}
        violations = []
        for qi, q in enumerate(corpus):
            for op in TRAIN_OPS:
                if not applicable(op, q, ctx):
                    continue
                pair = apply_operator(op, q, ctx)
                out = pair.paraphrase
                if pair.label != pair_label(op) or not out.strip():
                    violations.append((q.qid, op, "label/empty"))
                    continue
                if op in ("f1", "f2", "f3", "f4"):
                    if not _positive_preserves_content(q, op, out, expansions):
                        violations.append((q.qid, op, out))
                elif op == "f5":
                    if not contiguous_token_deletion(q.text, out):
                        violations.append((q.qid, op, out))
                elif op == "f6":
                    if not (q.text.startswith(out) and len(out) < len(q.text)):
                        violations.append((q.qid, op, out))
                elif op == "f7":
                    if not entity_edit_certificate(q, out, lexicon):
                        violations.append((q.qid, op, out))
                elif op == "f8":
                    if not number_delete_certificate(q, out):
                        violations.append((q.qid, op, out))
                elif op == "f10":
                    if not unit_swap_certificate(q, out, lexicon):
                        violations.append((q.qid, op, out))
            # reconstruction keeps numbers, units and the question tail
            fb_out = fb_reconstruct(q, ctx.provider,
                                    np.random.default_rng(qi))
            kept = [t.surface for t in tokenize(fb_out)]
            protected = [q.tokens[i].surface
                         for i in sorted(_protected_indices(q))]
            if not _is_subsequence(protected, kept):
                violations.append((q.qid, "fb", fb_out))
        assert violations == [], f"{len(violations)} violations: " \
            f"{violations[:5]}"

    gate("operator-invariants-1000q", body, budget_s=30.0)


# -- gate 3: gradient correctness --------------------------------------------

def test_gradient_correctness():
    def body():
        for loss in ("triplet", "mnrl"):
            result = gradient_check(loss=loss, d=8, n_batches=20)
            assert result["passed"], result
            assert result["max_rel_err"] <= 1e-4

    gate("gradient-check", body, budget_s=30.0)


# -- gate 4: metric oracle equivalence ---------------------------------------

def test_metric_oracle_equivalence():
    def body():
        def close(a, b):
            return abs(a - b) <= 1e-12

        count = 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")    # single-class slices warn
            for labels, preds, scores in sweep_assignments(8):
                report = compute_metrics(labels, scores)
                ref = reference_metrics(labels, preds, scores)
                assert report.confusion == ref["confusion"]
                for cls, key in (("0", "class0"), ("1", "class1")):
                    got = report.per_class[cls]
                    p, r, f, n = ref[key]
                    assert close(got["precision"], p) and \
                        close(got["recall"], r) and close(got["f1"], f) and \
                        got["support"] == n
                for name in ("macro", "weighted"):
                    got = getattr(report, name)
                    p, r, f = ref[name]
                    assert close(got["precision"], p) and \
                        close(got["recall"], r) and close(got["f1"], f)
                assert close(report.mu_pos, ref["mu_pos"])
                assert close(report.mu_neg, ref["mu_neg"])
                assert report.mu_sep == report.mu_pos - report.mu_neg
                count += 1
        assert count == sum(4 ** n for n in range(1, 9))

    gate("metric-oracle-n<=8", body, budget_s=10.0)


# -- gates 5 and 6: the full training pipeline -------------------------------

@pytest.fixture(scope="module")
def pipeline(lexicon):
    """Train once at full scale; the separation and generalization gates
    both read from this."""
    t0 = time.perf_counter()
    corpus = synth_corpus(200, seed=0, lexicon=lexicon)
    held = synth_corpus(50, seed=77, lexicon=lexicon)
    assert not {q.text for q in corpus} & {q.text for q in held}
    aux = EncoderModel.init(d=256, n_buckets=1 << 18, seed=1)
    ctx = OpContext(StubProvider(), aux, lexicon=lexicon, seed=11)
    triplets, _ = build_triplets(corpus, ctx, strategy="enumerate-all")
    trained = EncoderModel.init(d=256, n_buckets=1 << 18, seed=3407)
    untrained = EncoderModel.init(d=256, n_buckets=1 << 18, seed=3407)
    report = train(trained, triplets, TrainConfig())
    eval_ctx = OpContext(StubProvider(), aux, lexicon=lexicon, seed=99)
    eval_pairs = augment_corpus(held, eval_ctx)
    testset = build_testset(held, StubProvider(), seed=5)
    return {"trained": trained, "untrained": untrained,
            "eval_pairs": eval_pairs, "testset": testset, "report": report,
            "build_seconds": time.perf_counter() - t0}


def test_separation_learning(pipeline):
    def body():
        after = evaluate(pipeline["trained"], pipeline["eval_pairs"])
        before = evaluate(pipeline["untrained"], pipeline["eval_pairs"])
        print(f"  mu_sep trained {after.mu_sep:.3f} vs untrained "
              f"{before.mu_sep:.3f}, weighted F1 {after.weighted['f1']:.3f}")
        assert after.mu_sep >= 0.5
        assert after.mu_sep >= 5.0 * before.mu_sep
        assert after.weighted["f1"] >= 0.75

    # budget covers corpus synthesis, triplet building and the 9 epochs
    gate("separation-learning", body, budget_s=300.0,
         carried_s=pipeline["build_seconds"])


def test_generalization_to_unseen_operators(pipeline):
    def body():
        after = evaluate(pipeline["trained"], pipeline["testset"],
                         label_source="intended")
        before = evaluate(pipeline["untrained"], pipeline["testset"],
                          label_source="intended")
        print(f"  held-out ops mu_sep trained {after.mu_sep:.3f} vs "
              f"untrained {before.mu_sep:.3f}")
        assert after.mu_sep > before.mu_sep

    gate("unseen-operator-generalization", body)


# -- gate 7: pseudo-labelling threshold --------------------------------------

def test_pseudo_labelling_split():
    def body():
        # planted single-trigram vectors give exactly known cosines
        model = _planted_model({
            "abc": [1.0, 0.0], "abd": [1.0, 0.0],       # cos 1.0
            "abe": [1.0, 1.0],                          # cos 1/sqrt(2)
            "abf": [3.0, 1.0],                          # cos 3/sqrt(10)
            "abg": [0.0, 1.0],                          # cos 0.0
        })
        pairs = [AugmentedPair("abc", "abc", "f2", 1),
                 AugmentedPair("abc", "abd", "f1", 0),
                 AugmentedPair("abc", "abe", "f1", 1),
                 AugmentedPair("abc", "abf", "f1", 0),
                 AugmentedPair("abc", "abg", "f1", 1)]
        relabelled, summary = pseudo_label(pairs, model, iota=0.8)
        assert [p.label for p in relabelled] == [1, 1, 0, 1, 0]
        assert set(summary) == {"positive_pct", "negative_pct"}
        assert summary["positive_pct"] == 60.0
        assert summary["negative_pct"] == 40.0
        assert all(round(v, 2) == v for v in summary.values())
        # the threshold itself is excluded: > iota, never >=
        s = score(model, "abc", "abe")
        assert pseudo_label_scores([s], iota=s) == [0]
        assert pseudo_label_scores([s], iota=s - 1e-9) == [1]

    gate("pseudo-label-threshold", body)


# -- gate 8: bitwise reproducibility -----------------------------------------

def _run_pipeline_cli(root):
    env = dict(os.environ)
    env.pop("PARAQD_PROVIDER", None)
    base = [sys.executable, "-m", "paraqd.cli"]
    steps = [
        ["synth", "--n", "40", "--seed", "3407",
         "--out-dir", f"{root}/synth"],
        ["triplets", "--corpus", f"{root}/synth/questions.jsonl",
         "--strategy", "enumerate-all", "--seed", "3407",
         "--out-dir", f"{root}/tri"],
        ["train", "--triplets", f"{root}/tri/triplets.jsonl",
         "--epochs", "3", "--seed", "3407", "--out-dir", f"{root}/train"],
        ["augment", "--corpus", f"{root}/synth/questions.jsonl",
         "--seed", "3407", "--out-dir", f"{root}/aug"],
        ["evaluate", "--pairs", f"{root}/aug/pairs.jsonl",
         "--checkpoint", f"{root}/train/checkpoint.bin",
         "--seed", "3407", "--out-dir", f"{root}/eval"],
    ]
    for step in steps:
        proc = subprocess.run(base + step, env=env, capture_output=True,
                              text=True)
        assert proc.returncode == 0, (step[0], proc.stderr)


def test_pipeline_determinism(tmp_path):
    def body():
        for name in ("run1", "run2"):
            _run_pipeline_cli(tmp_path / name)
        for artifact in ("synth/questions.jsonl", "tri/triplets.jsonl",
                         "train/checkpoint.bin", "eval/metrics.json"):
            a = (tmp_path / "run1" / artifact).read_bytes()
            b = (tmp_path / "run2" / artifact).read_bytes()
            assert a == b, f"{artifact} differs between runs"
        report = json.loads((tmp_path / "run1" / "eval" /
                             "metrics.json").read_text())
        assert "mu_sep" in report and "weighted" in report

    gate("pipeline-determinism", body)


# -- gate 9: keyphrase ranking oracle ----------------------------------------

def test_top_phrase_matches_pagerank_oracle(lexicon):
    def body():
        q = analyze(KEYPHRASE_FIXTURE, lexicon)
        topics = cluster_candidates(extract_candidates(q))
        oracle_scores = _brute_force_pagerank(topics)
        best_topic = topics[int(np.argmax(oracle_scores))]
        oracle_phrase = min(best_topic, key=lambda c: c.start).surface
        assert top_k_phrases(q, k=1) == [oracle_phrase]

    gate("keyphrase-oracle", body)
