"""Reference text encoder: hashed character n-grams through a learned table.

The featurizer lowercases the text, collects character n-grams of a few fixed
orders, hashes each n-gram with FNV-1a 64 into one of `n_buckets` slots, and
L2-normalizes the bucket counts. The embedding is the feature-weighted sum of
rows of a trainable `n_buckets x d` table. Train mode applies feature dropout
with inverse scaling; eval mode is deterministic. Checkpoints are a one-line
JSON header followed by the raw little-endian float32 table.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import CheckpointError, EmptyText, ZeroVector

NGRAM_ORDERS = (3, 4, 5)
DEFAULT_DIM = 256
DEFAULT_BUCKETS = 1 << 18
DEFAULT_DROPOUT = 0.1
VERSION = "ngram-ref-1"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def char_ngram_features(text: str, orders: tuple[int, ...] = NGRAM_ORDERS,
                        n_buckets: int = DEFAULT_BUCKETS) -> tuple[np.ndarray, np.ndarray]:
    """Sorted bucket indices and L2-normalized counts for `text`.

    Texts shorter than every order produce no features (a zero vector
    downstream).
    """
    if not text.strip():
        raise EmptyText("cannot featurize empty text")
    s = text.lower()
    counts: dict[int, int] = {}
    for order in orders:
        for i in range(len(s) - order + 1):
            bucket = fnv1a64(s[i:i + order].encode("utf-8")) % n_buckets
            counts[bucket] = counts.get(bucket, 0) + 1
    if not counts:
        return np.empty(0, dtype=np.int64), np.empty(0)
    idx = np.array(sorted(counts), dtype=np.int64)
    vals = np.array([counts[b] for b in idx], dtype=np.float64)
    return idx, vals / np.linalg.norm(vals)


class EncoderModel:
    """Trainable encoder state. `table` is the only learnable parameter."""

    def __init__(self, table: np.ndarray, orders: tuple[int, ...] = NGRAM_ORDERS,
                 dropout: float = DEFAULT_DROPOUT, version: str = VERSION):
        self.table = table
        self.n_buckets, self.d = table.shape
        self.orders = tuple(orders)
        self.dropout = float(dropout)
        self.version = version
        self._feature_cache: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    @classmethod
    def init(cls, d: int = DEFAULT_DIM, n_buckets: int = DEFAULT_BUCKETS,
             seed: int = 0, dropout: float = DEFAULT_DROPOUT,
             orders: tuple[int, ...] = NGRAM_ORDERS,
             dtype=np.float32) -> "EncoderModel":
        rng = np.random.default_rng(seed)
        table = rng.normal(0.0, 0.02, size=(n_buckets, d)).astype(dtype)
        return cls(table, orders=orders, dropout=dropout)

    def features(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        hit = self._feature_cache.get(text)
        if hit is None:
            hit = char_ngram_features(text, self.orders, self.n_buckets)
            self._feature_cache[text] = hit
        return hit

    def embed(self, text: str, train: bool = False,
              rng: np.random.Generator | None = None) -> np.ndarray:
        idx, vals = self.features(text)
        if train and self.dropout > 0.0:
            if rng is None:
                raise ValueError("train-mode embed needs an rng for dropout")
            keep = rng.random(len(vals)) >= self.dropout
            idx, vals = idx[keep], vals[keep] / (1.0 - self.dropout)
        if len(idx) == 0:
            return np.zeros(self.d, dtype=self.table.dtype)
        return vals.astype(self.table.dtype) @ self.table[idx]


def cossim(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity of a zero vector is undefined")
    return float(np.clip(float(u @ v) / (nu * nv), -1.0, 1.0))


def score(model: EncoderModel, text_a: str, text_b: str) -> float:
    """Cosine similarity of eval-mode embeddings; the paraphrase score."""
    return cossim(model.embed(text_a), model.embed(text_b))


def save_checkpoint(model: EncoderModel, path: str) -> None:
    header = {
        "version": model.version,
        "d": model.d,
        "n_buckets": model.n_buckets,
        "ngram_orders": list(model.orders),
        "dropout": model.dropout,
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        f.write(b"\n")
        f.write(np.ascontiguousarray(model.table, dtype="<f4").tobytes())


def load_checkpoint(path: str) -> EncoderModel:
    with open(path, "rb") as f:
        header_line = f.readline()
        payload = f.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"bad checkpoint header: {exc}") from exc
    for key in ("version", "d", "n_buckets", "ngram_orders", "dropout"):
        if key not in header:
            raise CheckpointError(f"checkpoint header missing {key!r}")
    d, n_buckets = header["d"], header["n_buckets"]
    expected = d * n_buckets * 4
    if len(payload) != expected:
        raise CheckpointError(
            f"payload is {len(payload)} bytes, expected {expected}")
    table = np.frombuffer(payload, dtype="<f4").reshape(n_buckets, d).copy()
    return EncoderModel(table, orders=tuple(header["ngram_orders"]),
                        dropout=header["dropout"], version=header["version"])
