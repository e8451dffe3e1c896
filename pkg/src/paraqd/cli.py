"""Command-line front end.

Every subcommand prints a one-line JSON summary on stdout and writes its
artifacts under --out-dir only. Failures print {"error", "message"} on
stderr and exit nonzero. The PARAQD_PROVIDER environment variable overrides
--provider wherever a paraphrase provider is involved.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import augment as aug
from .corpus import ingest, synth_corpus, write_corpus
from .encoder import (DEFAULT_BUCKETS, DEFAULT_DIM, DEFAULT_DROPOUT,
                      EncoderModel, load_checkpoint, score)
from .errors import ParaQDError
from .evaluation import (DEFAULT_TAU, ablate_operators, evaluate,
                         export_embeddings, write_ablation_csv)
from .provider import make_provider
from .testset import build_testset, read_test_pairs, write_test_pairs
from .training import (DEFAULT_SEED, TrainConfig, gradient_check, seed_search,
                       train)

PROVIDER_ENV = "PARAQD_PROVIDER"


def _resolve_provider(args):
    spec = os.environ.get(PROVIDER_ENV) or getattr(args, "provider", "stub")
    return make_provider(spec)


def _out_path(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _load_model(args) -> EncoderModel:
    if getattr(args, "checkpoint", None):
        return load_checkpoint(args.checkpoint)
    return EncoderModel.init(d=args.dim, n_buckets=args.buckets,
                             seed=args.seed, dropout=args.dropout)


def _context(args) -> aug.OpContext:
    return aug.OpContext(provider=_resolve_provider(args),
                         encoder=_load_model(args),
                         seed=args.seed,
                         num_candidates=args.num_candidates,
                         top_k=args.top_k)


def _read_labelled_pairs(path):
    # test-set rows carry "intended"; training pairs carry "label"
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if first and "\"intended\"" in first:
        return read_test_pairs(path)
    return aug.read_pairs(path)


# ---------------------------------------------------------------------------
# subcommand bodies

def _cmd_synth(args) -> int:
    questions = synth_corpus(args.n, seed=args.seed)
    path = _out_path(args, "questions.jsonl")
    write_corpus(path, questions)
    _emit({"command": "synth", "written": len(questions), "path": path})
    return 0


def _cmd_augment(args) -> int:
    corpus = ingest(args.corpus)
    ctx = _context(args)
    ops = tuple(args.ops.split(",")) if args.ops else aug.TRAIN_OPS
    unknown = [op for op in ops if op not in aug.TRAIN_OPS]
    if unknown:
        raise ValueError(f"unknown ops: {', '.join(unknown)}")
    pairs = aug.augment_corpus(corpus, ctx, ops=ops)
    path = _out_path(args, "pairs.jsonl")
    aug.write_pairs(path, pairs)
    by_op: dict[str, int] = {}
    for pair in pairs:
        by_op[pair.op] = by_op.get(pair.op, 0) + 1
    _emit({"command": "augment", "pairs": len(pairs), "by_op": by_op,
           "path": path})
    return 0


def _cmd_triplets(args) -> int:
    corpus = ingest(args.corpus)
    ctx = _context(args)
    triplets, dropped = aug.build_triplets(corpus, ctx,
                                           strategy=args.strategy)
    path = _out_path(args, "triplets.jsonl")
    aug.write_triplets(path, triplets)
    _emit({"command": "triplets", "triplets": len(triplets),
           "dropped": len(dropped), "path": path})
    return 0


def _cmd_build_testset(args) -> int:
    corpus = ingest(args.corpus)
    provider = _resolve_provider(args)
    pairs = build_testset(corpus, provider, seed=args.seed)
    path = _out_path(args, "testset.jsonl")
    write_test_pairs(path, pairs)
    _emit({"command": "build-testset", "pairs": len(pairs), "path": path})
    return 0


def _train_config(args) -> TrainConfig:
    return TrainConfig(epochs=args.epochs, lr=args.lr,
                       batch_size=args.batch, margin=args.margin,
                       loss=args.loss, mnrl_scale=args.mnrl_scale,
                       warmup_frac=args.warmup_frac,
                       weight_decay=args.weight_decay, seed=args.seed)


def _cmd_train(args) -> int:
    triplets = aug.read_triplets(args.triplets)
    model = _load_model(args)
    config = _train_config(args)
    ckpt = _out_path(args, "checkpoint.bin")
    report = train(model, triplets, config, checkpoint_path=ckpt)
    with open(_out_path(args, "train_report.json"), "w") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
    _emit({"command": "train", "checkpoint": ckpt, "steps": report.steps,
           "final_epoch_loss": report.per_epoch_loss[-1]})
    return 0


def _cmd_seed_search(args) -> int:
    triplets = aug.read_triplets(args.triplets)
    pairs = _read_labelled_pairs(args.validation)
    config = _train_config(args)
    seeds = tuple(int(s) for s in args.seeds.split(","))

    def factory():
        return EncoderModel.init(d=args.dim, n_buckets=args.buckets,
                                 seed=args.init_seed, dropout=args.dropout)

    report = seed_search(factory, triplets, pairs, config, seeds=seeds,
                         subset_frac=args.subset_frac, tau=args.tau)
    with open(_out_path(args, "seed_search.json"), "w") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
    _emit({"command": "seed-search", **report.to_json()})
    return 0


def _cmd_score(args) -> int:
    model = _load_model(args)
    if args.pairs:
        pairs = _read_labelled_pairs(args.pairs)
        out = _out_path(args, "scores.jsonl")
        with open(out, "w", encoding="utf-8") as fh:
            for pair in pairs:
                s = score(model, pair.anchor, pair.paraphrase)
                fh.write(json.dumps({"anchor": pair.anchor,
                                     "paraphrase": pair.paraphrase,
                                     "op": pair.op, "score": s},
                                    ensure_ascii=False) + "\n")
        _emit({"command": "score", "pairs": len(pairs), "path": out})
    else:
        if args.anchor is None or args.candidate is None:
            raise ValueError("need --anchor and --candidate, or --pairs")
        _emit({"command": "score",
               "score": score(model, args.anchor, args.candidate)})
    return 0


def _cmd_evaluate(args) -> int:
    model = _load_model(args)
    pairs = _read_labelled_pairs(args.pairs)
    report = evaluate(model, pairs, tau=args.tau,
                      label_source=args.label_source)
    with open(_out_path(args, "metrics.json"), "w") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
    _emit({"command": "evaluate", "n_pairs": report.n_pairs,
           "macro_f1": report.macro["f1"],
           "weighted_f1": report.weighted["f1"], "mu_sep": report.mu_sep})
    return 0


def _cmd_pseudo_label(args) -> int:
    model = _load_model(args)
    pairs = _read_labelled_pairs(args.pairs)
    relabelled, summary = aug.pseudo_label(pairs, model, iota=args.iota)
    path = _out_path(args, "pseudo_labelled.jsonl")
    aug.write_pairs(path, relabelled)
    _emit({"command": "pseudo-label", "path": path, **summary})
    return 0


def _cmd_ablate_ops(args) -> int:
    corpus = ingest(args.corpus)
    ctx = _context(args)
    pairs = _read_labelled_pairs(args.eval_pairs)
    config = _train_config(args)

    def factory():
        return EncoderModel.init(d=args.dim, n_buckets=args.buckets,
                                 seed=args.seed, dropout=args.dropout)

    rows = ablate_operators(corpus, ctx, config, pairs, factory, tau=args.tau,
                            label_source=args.label_source)
    path = _out_path(args, "ablation.csv")
    write_ablation_csv(path, rows)
    _emit({"command": "ablate-ops", "rows": len(rows), "path": path})
    return 0


def _cmd_export_embeddings(args) -> int:
    model = _load_model(args)
    triplets = aug.read_triplets(args.triplets)
    path = _out_path(args, "embeddings.csv")
    n = export_embeddings(model, triplets, path, projection=args.projection)
    _emit({"command": "export-embeddings", "rows": n, "path": path})
    return 0


def _cmd_gradcheck(args) -> int:
    kinds = ("triplet", "mnrl") if args.loss == "both" else (args.loss,)
    results = [gradient_check(loss=kind, n_batches=args.batches)
               for kind in kinds]
    _emit({"command": "gradcheck", "results": results,
           "passed": all(r["passed"] for r in results)})
    return 0 if all(r["passed"] for r in results) else 1


# ---------------------------------------------------------------------------
# argument wiring

def _add_common(p, provider=False, encoder=False, seed=True, out=True):
    if seed:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    if out:
        p.add_argument("--out-dir", default="paraqd-out")
    if provider:
        p.add_argument("--provider", default="stub",
                       help="stub, http(s) URL, or stdio:<command> "
                            f"(overridden by ${PROVIDER_ENV})")
    if encoder:
        p.add_argument("--checkpoint", default=None,
                       help="encoder checkpoint; fresh seeded init if absent")
        p.add_argument("--dim", type=int, default=DEFAULT_DIM)
        p.add_argument("--buckets", type=int, default=DEFAULT_BUCKETS)
        p.add_argument("--dropout", type=float, default=DEFAULT_DROPOUT)


def _add_context(p):
    _add_common(p, provider=True, encoder=True)
    p.add_argument("--num-candidates", type=int,
                   default=aug.DEFAULT_NUM_CANDIDATES)
    p.add_argument("--top-k", type=int, default=aug.DEFAULT_TOP_K)


def _add_train_flags(p):
    p.add_argument("--epochs", type=int, default=9)
    p.add_argument("--lr", type=float, default=TrainConfig.lr)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--loss", choices=("triplet", "mnrl"), default="triplet")
    p.add_argument("--mnrl-scale", type=float, default=20.0)
    p.add_argument("--warmup-frac", type=float, default=0.1)
    p.add_argument("--weight-decay", type=float, default=0.01)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paraqd",
        description="Paraphrase quality scoring for algebraic word problems")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--n", type=int, default=200)
    _add_common(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("augment", help="labelled pairs from every operator")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ops", default=None, help="comma-joined subset of f1..f10")
    _add_context(p)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("triplets", help="training triplets from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--strategy", choices=("sample-one", "enumerate-all"),
                   default="sample-one")
    _add_context(p)
    p.set_defaults(func=_cmd_triplets)

    p = sub.add_parser("build-testset", help="held-out labelled test pairs")
    p.add_argument("--corpus", required=True)
    _add_common(p, provider=True)
    p.set_defaults(func=_cmd_build_testset)

    p = sub.add_parser("train", help="fit the encoder on triplets")
    p.add_argument("--triplets", required=True)
    _add_common(p, encoder=True)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("seed-search", help="pick a training seed on subsets")
    p.add_argument("--triplets", required=True)
    p.add_argument("--validation", required=True)
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--subset-frac", type=float, default=0.2)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--init-seed", type=int, default=DEFAULT_SEED)
    _add_common(p, encoder=True)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_seed_search)

    p = sub.add_parser("score", help="cosine score for texts or a pair file")
    p.add_argument("--anchor", default=None)
    p.add_argument("--candidate", default=None)
    p.add_argument("--pairs", default=None)
    _add_common(p, encoder=True)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("evaluate", help="metrics over labelled pairs")
    p.add_argument("--pairs", required=True)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--label-source", choices=("label", "intended", "human"),
                   default="label")
    _add_common(p, encoder=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("pseudo-label", help="relabel pairs by encoder score")
    p.add_argument("--pairs", required=True)
    p.add_argument("--iota", type=float, default=0.8)
    _add_common(p, encoder=True)
    p.set_defaults(func=_cmd_pseudo_label)

    p = sub.add_parser("ablate-ops", help="leave-one-operator-out study")
    p.add_argument("--corpus", required=True)
    p.add_argument("--eval-pairs", required=True)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--label-source", choices=("label", "intended", "human"),
                   default="label")
    _add_context(p)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_ablate_ops)

    p = sub.add_parser("export-embeddings", help="triplet embeddings as CSV")
    p.add_argument("--triplets", required=True)
    p.add_argument("--projection", choices=("none", "pca2d"), default="none")
    _add_common(p, encoder=True)
    p.set_defaults(func=_cmd_export_embeddings)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--loss", choices=("triplet", "mnrl", "both"),
                   default="both")
    p.add_argument("--batches", type=int, default=20)
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParaQDError, OSError, ValueError, RuntimeError) as exc:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
