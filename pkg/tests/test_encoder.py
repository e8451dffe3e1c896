import numpy as np
import pytest

from paraqd.encoder import (EncoderModel, char_ngram_features, cossim,
                            fnv1a64, load_checkpoint, save_checkpoint, score)
from paraqd.errors import CheckpointError, EmptyText, ZeroVector


def _fnv_reference(data: bytes) -> int:
    """Spelled-out FNV-1a, independent of the vectorized implementation."""
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) % (1 << 64)
    return h


def test_fnv_known_vectors():
    # classic published test vectors for 64-bit FNV-1a
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8


def test_fnv_matches_reference():
    for text in ("abc", "kmph", "Alex travelled 100 km", "x" * 50):
        assert fnv1a64(text.encode()) == _fnv_reference(text.encode())


def test_features_hand_oracle():
    # "abcd", orders (3,4): ngrams abc, bcd, abcd -> counts 1 each, L2 = 1/sqrt(3)
    idx, vals = char_ngram_features("abcd", orders=(3, 4), n_buckets=1 << 20)
    expected = sorted((fnv1a64(g.encode()) % (1 << 20)
                       for g in ("abc", "bcd", "abcd")))
    assert list(idx) == expected
    assert np.allclose(vals, 1.0 / np.sqrt(3.0))


def test_features_lowercase_and_counts():
    a = char_ngram_features("KM", orders=(2,), n_buckets=64)
    b = char_ngram_features("km", orders=(2,), n_buckets=64)
    assert list(a[0]) == list(b[0])
    idx, vals = char_ngram_features("aaaa", orders=(3,), n_buckets=64)
    # "aaa" twice -> single bucket, weight 1 after normalization
    assert len(idx) == 1
    assert np.allclose(vals, [1.0])


def test_features_empty_and_short():
    with pytest.raises(EmptyText):
        char_ngram_features("   ", orders=(3,), n_buckets=64)
    idx, vals = char_ngram_features("ab", orders=(3,), n_buckets=64)
    assert len(idx) == 0 and len(vals) == 0


def test_embed_toy_oracle():
    # d=2, n_buckets=4: verify features @ table by hand
    table = np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 2.0], [3.0, -1.0]])
    model = EncoderModel(table, orders=(3,), dropout=0.0)
    text = "abc"
    row = fnv1a64(b"abc") % 4
    emb = model.embed(text)
    assert np.allclose(emb, table[row])


def test_embed_eval_deterministic(toy_encoder):
    a = toy_encoder.embed("The train left early.")
    b = toy_encoder.embed("The train left early.")
    assert np.array_equal(a, b)


def test_dropout_zero_train_equals_eval():
    model = EncoderModel.init(d=16, n_buckets=256, seed=0, dropout=0.0)
    rng = np.random.default_rng(1)
    text = "some words here"
    assert np.allclose(model.embed(text),
                       model.embed(text, train=True, rng=rng))


def test_dropout_train_mode_differs():
    model = EncoderModel.init(d=16, n_buckets=256, seed=0, dropout=0.5)
    rng = np.random.default_rng(1)
    text = "some words here again"
    assert not np.allclose(model.embed(text),
                           model.embed(text, train=True, rng=rng))


def test_train_mode_requires_rng():
    model = EncoderModel.init(d=16, n_buckets=256, seed=0, dropout=0.5)
    with pytest.raises(ValueError):
        model.embed("text here", train=True)


def test_cossim_properties():
    a = np.array([1.0, 0.0])
    assert cossim(a, a) == pytest.approx(1.0)
    assert cossim(a, -a) == pytest.approx(-1.0)
    assert cossim(a, np.array([0.0, 2.0])) == pytest.approx(0.0)
    with pytest.raises(ZeroVector):
        cossim(a, np.zeros(2))


def test_score_identity_and_symmetry(toy_encoder):
    x = "Maria saved 40 dollars."
    y = "Maria spent 40 dollars."
    assert score(toy_encoder, x, x) == pytest.approx(1.0)
    assert score(toy_encoder, x, y) == pytest.approx(score(toy_encoder, y, x))
    assert -1.0 <= score(toy_encoder, x, y) <= 1.0


def test_checkpoint_round_trip(tmp_path, toy_encoder):
    path = tmp_path / "model.bin"
    save_checkpoint(toy_encoder, path)
    loaded = load_checkpoint(path)
    assert loaded.d == toy_encoder.d
    assert loaded.n_buckets == toy_encoder.n_buckets
    assert loaded.orders == toy_encoder.orders
    assert loaded.dropout == toy_encoder.dropout
    assert np.array_equal(loaded.table,
                          toy_encoder.table.astype(np.float32))


def test_checkpoint_bytes_stable(tmp_path, toy_encoder):
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    save_checkpoint(toy_encoder, p1)
    save_checkpoint(toy_encoder, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_truncated_payload(tmp_path, toy_encoder):
    path = tmp_path / "model.bin"
    save_checkpoint(toy_encoder, path)
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_checkpoint_bad_header(tmp_path):
    path = tmp_path / "model.bin"
    path.write_bytes(b"not json\n\x00\x00")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_init_seeded_reproducible():
    a = EncoderModel.init(d=8, n_buckets=32, seed=5)
    b = EncoderModel.init(d=8, n_buckets=32, seed=5)
    c = EncoderModel.init(d=8, n_buckets=32, seed=6)
    assert np.array_equal(a.table, b.table)
    assert not np.array_equal(a.table, c.table)
