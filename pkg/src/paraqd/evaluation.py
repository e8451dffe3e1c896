"""Scoring and metric computation for labelled paraphrase pairs.

Predictions threshold the cosine score at tau (strictly greater means
positive). Precision, recall and F1 are reported per class plus macro and
support-weighted averages, together with the separation statistic

    mu_sep = mean(score | label 1) - mean(score | label 0)

computed exactly from the scores used for classification. `ablate_operators`
retrains one model per excluded operator from an identical initialization and
tabulates the damage.
"""
from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import asdict, dataclass, replace as dc_replace

import numpy as np

from .augment import TRAIN_OPS, build_triplets
from .encoder import EncoderModel, score
from .errors import UnlabelledPair

logger = logging.getLogger(__name__)

DEFAULT_TAU = 0.5


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass
class MetricsReport:
    n_pairs: int
    tau: float
    label_source: str
    confusion: dict          # tp/fp/fn/tn with label 1 as the positive class
    per_class: dict          # "0" and "1" -> precision/recall/f1/support
    macro: dict
    weighted: dict
    mu_pos: float
    mu_neg: float
    mu_sep: float
    per_op: dict             # op -> counts, mean_score, confusion

    def to_json(self) -> dict:
        return asdict(self)


def compute_metrics(labels, scores, tau: float = DEFAULT_TAU, ops=None,
                    label_source: str = "label") -> MetricsReport:
    """Classification and separation metrics from parallel label/score lists."""
    labels = [int(x) for x in labels]
    scores = [float(s) for s in scores]
    if len(labels) != len(scores):
        raise ValueError("labels and scores differ in length")
    if not labels:
        raise ValueError("no pairs to evaluate")
    if any(x not in (0, 1) for x in labels):
        raise ValueError("labels must be 0 or 1")
    preds = [1 if s > tau else 0 for s in scores]

    tp = sum(1 for y, p in zip(labels, preds) if y == 1 and p == 1)
    fp = sum(1 for y, p in zip(labels, preds) if y == 0 and p == 1)
    fn = sum(1 for y, p in zip(labels, preds) if y == 1 and p == 0)
    tn = len(labels) - tp - fp - fn

    p1, r1, f1 = _prf(tp, fp, fn)
    p0, r0, f0 = _prf(tn, fn, fp)   # class 0 as its own positive
    n1 = sum(labels)
    n0 = len(labels) - n1
    per_class = {
        "0": {"precision": p0, "recall": r0, "f1": f0, "support": n0},
        "1": {"precision": p1, "recall": r1, "f1": f1, "support": n1},
    }
    macro = {"precision": (p0 + p1) / 2, "recall": (r0 + r1) / 2,
             "f1": (f0 + f1) / 2}
    total = n0 + n1
    weighted = {"precision": (n0 * p0 + n1 * p1) / total,
                "recall": (n0 * r0 + n1 * r1) / total,
                "f1": (n0 * f0 + n1 * f1) / total}

    pos_scores = [s for y, s in zip(labels, scores) if y == 1]
    neg_scores = [s for y, s in zip(labels, scores) if y == 0]
    if not pos_scores:
        warnings.warn("no positive-labelled pairs; mu_pos set to 0.0")
    if not neg_scores:
        warnings.warn("no negative-labelled pairs; mu_neg set to 0.0")
    mu_pos = sum(pos_scores) / len(pos_scores) if pos_scores else 0.0
    mu_neg = sum(neg_scores) / len(neg_scores) if neg_scores else 0.0

    per_op: dict = {}
    if ops is not None:
        if len(ops) != len(labels):
            raise ValueError("ops and labels differ in length")
        for op, y, pr, s in zip(ops, labels, preds, scores):
            slot = per_op.setdefault(op, {"count": 0, "mean_score": 0.0,
                                          "tp": 0, "fp": 0, "fn": 0, "tn": 0})
            slot["count"] += 1
            slot["mean_score"] += s
            key = ("tn", "fp", "fn", "tp")[2 * y + pr]
            slot[key] += 1
        for slot in per_op.values():
            slot["mean_score"] /= slot["count"]

    return MetricsReport(
        n_pairs=len(labels), tau=tau, label_source=label_source,
        confusion={"tp": tp, "fp": fp, "fn": fn, "tn": tn},
        per_class=per_class, macro=macro, weighted=weighted,
        mu_pos=mu_pos, mu_neg=mu_neg, mu_sep=mu_pos - mu_neg, per_op=per_op)


def _pair_fields(pair, label_source: str):
    """(anchor, paraphrase, op, label) from an augmented or test pair."""
    if label_source == "label":
        label = getattr(pair, "label", None)
    elif label_source == "intended":
        label = getattr(pair, "intended", None)
    elif label_source == "human":
        label = getattr(pair, "human_label", None)
    else:
        raise ValueError(f"unknown label source {label_source!r}")
    if label is None:
        raise UnlabelledPair(
            f"pair has no {label_source!r} label: {pair.anchor[:40]!r}")
    return pair.anchor, pair.paraphrase, pair.op, int(label)


def score_pairs(model: EncoderModel, pairs, label_source: str = "label"):
    """(labels, scores, ops) for a list of pairs under the given labelling."""
    labels, scores, ops = [], [], []
    for pair in pairs:
        a, b, op, label = _pair_fields(pair, label_source)
        labels.append(label)
        scores.append(score(model, a, b))
        ops.append(op)
    return labels, scores, ops


def evaluate(model: EncoderModel, pairs, tau: float = DEFAULT_TAU,
             label_source: str = "label") -> MetricsReport:
    labels, scores, ops = score_pairs(model, pairs, label_source)
    return compute_metrics(labels, scores, tau, ops, label_source)


# ---------------------------------------------------------------------------
# operator ablation

ABLATION_COLUMNS = ("removed_op", "polarity", "n_triplets",
                    "macro_f1", "weighted_f1", "mu_pos", "mu_neg", "mu_sep",
                    "weakest_in_polarity")


def ablate_operators(corpus, ctx, config, eval_pairs, model_factory,
                     tau: float = DEFAULT_TAU, ops=TRAIN_OPS,
                     label_source: str = "label") -> list[dict]:
    """Leave-one-operator-out retraining.

    Every run rebuilds triplets with the operator excluded and trains a fresh
    model from `model_factory` under the same config and seed, so rows differ
    only through the missing operator. The row whose removal hurts mu_sep
    most within its polarity is flagged.
    """
    from .training import train
    from .augment import NEGATIVE_OPS, POSITIVE_OPS

    rows = []
    for op in ops:
        allowed_pos = tuple(o for o in POSITIVE_OPS if o != op)
        allowed_neg = tuple(o for o in NEGATIVE_OPS if o != op)
        triplets, dropped = build_triplets(corpus, ctx,
                                           allowed_pos=allowed_pos,
                                           allowed_neg=allowed_neg)
        model = model_factory()
        train(model, triplets, config)
        report = evaluate(model, eval_pairs, tau=tau, label_source=label_source)
        rows.append({
            "removed_op": op,
            "polarity": "positive" if op in POSITIVE_OPS else "negative",
            "n_triplets": len(triplets),
            "macro_f1": report.macro["f1"],
            "weighted_f1": report.weighted["f1"],
            "mu_pos": report.mu_pos,
            "mu_neg": report.mu_neg,
            "mu_sep": report.mu_sep,
            "weakest_in_polarity": False,
        })
        logger.info("ablated %s: mu_sep %.4f (%d triplets, %d dropped)",
                    op, report.mu_sep, len(triplets), len(dropped))
    for polarity in ("positive", "negative"):
        group = [r for r in rows if r["polarity"] == polarity]
        if group:
            worst = min(group, key=lambda r: r["mu_sep"])
            worst["weakest_in_polarity"] = True
    return rows


def write_ablation_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=ABLATION_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


# ---------------------------------------------------------------------------
# embedding export

def pca_2d(X: np.ndarray, iters: int = 1000, tol: float = 1e-12):
    """Top two principal directions by power iteration with deflation."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need at least two rows for a 2d projection")
    Xc = X - X.mean(axis=0)
    C = Xc.T @ Xc / (X.shape[0] - 1)

    def top_eigvec(M):
        v = np.ones(M.shape[1]) / np.sqrt(M.shape[1])
        for _ in range(iters):
            nv = M @ v
            norm = np.linalg.norm(nv)
            if norm < tol:
                return v, 0.0
            nv /= norm
            if np.linalg.norm(nv - v) < tol:
                v = nv
                break
            v = nv
        return v, float(v @ M @ v)

    v1, lam1 = top_eigvec(C)
    C2 = C - lam1 * np.outer(v1, v1)
    v2, _ = top_eigvec(C2)
    v2 = v2 - (v2 @ v1) * v1
    n2 = np.linalg.norm(v2)
    if n2 > tol:
        v2 = v2 / n2
    comps = np.stack([v1, v2])
    return Xc @ comps.T, comps


def export_embeddings(model: EncoderModel, triplets, path,
                      projection: str = "none") -> int:
    """Write one CSV row per triplet leg; returns the number of rows.

    projection "none" emits the exact embedding; "pca2d" emits two
    coordinates from a deterministic power-iteration PCA.
    """
    if projection not in ("none", "pca2d"):
        raise ValueError(f"unknown projection {projection!r}")
    rows, embs = [], []
    for i, t in enumerate(triplets):
        for role, text in (("anchor", t.anchor), ("positive", t.positive),
                           ("negative", t.negative)):
            rows.append((i, role))
            embs.append(model.embed(text))
    if not rows:
        raise ValueError("no triplets to export")
    E = np.stack(embs)
    if projection == "pca2d":
        E, _ = pca_2d(E)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["triplet_id", "role"] +
                        [f"dim{j}" for j in range(E.shape[1])])
        for (tid, role), vec in zip(rows, E):
            writer.writerow([tid, role] + [repr(float(x)) for x in vec])
    return len(rows)
