"""Topic-clustered keyphrase ranking.

Candidates are maximal runs of noun/adjective-looking tokens (a stopword list
plus suffix heuristics stands in for a tagger). Candidates sharing enough word
stems are clustered into topics by average-linkage agglomeration, topics are
ranked by a damped random walk over a positional-proximity graph, and each
topic is represented by its first-occurring candidate, verbatim from the text.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoCandidates
from .text import Question, STOPWORDS

DAMPING = 0.85
SIM_THRESHOLD = 0.25
CONVERGENCE = 1e-8
MAX_ITERS = 200


def stem(word: str) -> str:
    w = word.lower()
    for suffix in ("ing", "ed", "s"):
        if w.endswith(suffix) and len(w) - len(suffix) >= 3:
            return w[: -len(suffix)]
    return w


def _content_token(surface: str) -> bool:
    if not surface.isalpha() or surface.lower() in STOPWORDS:
        return False
    w = surface.lower()
    if w.endswith("ly") and len(w) >= 4:
        return False
    if w.endswith("ing") and len(w) >= 5:
        return False
    if w.endswith("ed") and len(w) >= 5 and not w.endswith("eed"):
        return False
    return True


@dataclass(frozen=True)
class PhraseCandidate:
    surface: str
    tok_start: int
    tok_end: int
    start: int          # char offset of first token
    end: int
    stems: frozenset[str]


def extract_candidates(q: Question) -> list[PhraseCandidate]:
    """Maximal content-token runs per sentence, in order of occurrence."""
    out = []
    for ts, te in q.sentences:
        i = ts
        while i < te:
            if not _content_token(q.tokens[i].surface):
                i += 1
                continue
            j = i
            while j < te and _content_token(q.tokens[j].surface):
                j += 1
            start, end = q.tokens[i].start, q.tokens[j - 1].end
            out.append(PhraseCandidate(
                q.text[start:end], i, j, start, end,
                frozenset(stem(q.tokens[k].surface) for k in range(i, j))))
            i = j
    return out


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def cluster_candidates(candidates: list[PhraseCandidate],
                       threshold: float = SIM_THRESHOLD) -> list[list[PhraseCandidate]]:
    """Average-linkage agglomeration on stem-set Jaccard similarity.

    Merging stops when no cluster pair averages at or above `threshold`.
    Candidates are canonically ordered by char offset first, so the result
    does not depend on input order.
    """
    cands = sorted(candidates, key=lambda c: c.start)
    clusters: list[list[int]] = [[i] for i in range(len(cands))]
    sim = [[_jaccard(a.stems, b.stems) for b in cands] for a in cands]

    def linkage(ca: list[int], cb: list[int]) -> float:
        return sum(sim[i][j] for i in ca for j in cb) / (len(ca) * len(cb))

    while len(clusters) > 1:
        best, best_pair = -1.0, None
        for x in range(len(clusters)):
            for y in range(x + 1, len(clusters)):
                s = linkage(clusters[x], clusters[y])
                if s > best:
                    best, best_pair = s, (x, y)
        if best < threshold or best_pair is None:
            break
        x, y = best_pair
        clusters[x] = clusters[x] + clusters[y]
        del clusters[y]
    return [[cands[i] for i in c] for c in clusters]


def topic_scores(topics: list[list[PhraseCandidate]],
                 damping: float = DAMPING) -> np.ndarray:
    """Stationary scores of a damped walk over the topic proximity graph.

    Edge weight between two topics sums reciprocal token distances over all
    cross-topic candidate pairs. Scores are normalized to sum to 1.
    """
    n = len(topics)
    if n == 1:
        return np.array([1.0])
    w = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            total = 0.0
            for ca in topics[a]:
                for cb in topics[b]:
                    total += 1.0 / abs(ca.tok_start - cb.tok_start)
            w[a, b] = w[b, a] = total
    out_strength = w.sum(axis=1)
    dangling = out_strength == 0
    transition = np.zeros((n, n))
    nonzero = ~dangling
    transition[nonzero] = w[nonzero] / out_strength[nonzero, None]

    scores = np.full(n, 1.0 / n)
    for _ in range(MAX_ITERS):
        redistributed = scores[dangling].sum() / n
        updated = (1 - damping) / n + damping * (transition.T @ scores + redistributed)
        if np.abs(updated - scores).sum() < CONVERGENCE:
            scores = updated
            break
        scores = updated
    return scores / scores.sum()


def rank_topics(candidates: list[PhraseCandidate],
                threshold: float = SIM_THRESHOLD,
                damping: float = DAMPING) -> list[tuple[list[PhraseCandidate], float]]:
    """Topics with scores, best first; ties broken by earliest char offset."""
    if not candidates:
        raise NoCandidates("no phrase candidates")
    topics = cluster_candidates(candidates, threshold)
    scores = topic_scores(topics, damping)
    first_offset = [min(c.start for c in t) for t in topics]
    order = sorted(range(len(topics)), key=lambda i: (-scores[i], first_offset[i]))
    return [(topics[i], float(scores[i])) for i in order]


def representative(topic: list[PhraseCandidate]) -> PhraseCandidate:
    return min(topic, key=lambda c: c.start)


def top_k_candidates(q: Question, k: int = 10) -> list[PhraseCandidate]:
    """Representatives of the k best topics; [] when nothing qualifies."""
    candidates = extract_candidates(q)
    if not candidates:
        return []
    ranked = rank_topics(candidates)
    return [representative(t) for t, _ in ranked[:k]]


def top_k_phrases(q: Question, k: int = 10) -> list[str]:
    return [c.surface for c in top_k_candidates(q, k)]
