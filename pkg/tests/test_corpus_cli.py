"""Corpus ingestion, the synthetic generator, and the command-line surface.

CLI tests drive main() in-process at reduced scale and check the JSON
summary lines, artifact placement under --out-dir, the provider environment
override, and the nonzero-exit error contract."""
import json
import math
import os

import pytest

from paraqd.cli import PROVIDER_ENV, main
from paraqd.corpus import ingest, synth_corpus, write_corpus
from paraqd.errors import DuplicateId, ParseError

pytestmark = pytest.mark.usefixtures("_no_provider_env")


@pytest.fixture
def _no_provider_env(monkeypatch):
    monkeypatch.delenv(PROVIDER_ENV, raising=False)


# -- ingestion ---------------------------------------------------------------

def test_ingest_happy_path(tmp_path):
    path = tmp_path / "q.jsonl"
    path.write_text(
        '{"id": "a1", "question": "Tom walked 5 km. How long?"}\n'
        "\n"    # blank lines are fine
        '{"id": 7, "question": "Sara bought 3 pens for 6 dollars. Cost?"}\r\n',
        encoding="utf-8")
    questions = ingest(str(path))
    assert [q.qid for q in questions] == ["a1", "7"]
    assert questions[0].text.startswith("Tom walked")
    assert questions[1].numbers[0].value == 3.0


@pytest.mark.parametrize("line,lineno,needle", [
    ('{"id": "a", "question": "x? y 5 km."}\n{broken', 2, "bad JSON"),
    ('[1, 2]', 1, "not an object"),
    ('{"id": "a"}', 1, "missing id or question"),
    ('{"id": true, "question": "ok 5 km?"}', 1, "string or integer"),
    ('{"id": "a", "question": 5}', 1, "must be a string"),
    ('{"id": "a", "question": "   "}', 1, "empty question"),
])
def test_ingest_parse_errors(tmp_path, line, lineno, needle):
    path = tmp_path / "bad.jsonl"
    path.write_text(line + "\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        ingest(str(path))
    assert f"line {lineno}" in str(err.value)
    assert needle in str(err.value)


def test_ingest_duplicate_id(tmp_path):
    path = tmp_path / "dup.jsonl"
    path.write_text('{"id": "a", "question": "One 5 km trip?"}\n'
                    '{"id": "a", "question": "Another 7 km trip?"}\n',
                    encoding="utf-8")
    with pytest.raises(DuplicateId):
        ingest(str(path))


def test_corpus_round_trip(tmp_path, lexicon):
    questions = synth_corpus(6, seed=4, lexicon=lexicon)
    path = tmp_path / "out.jsonl"
    write_corpus(str(path), questions)
    back = ingest(str(path), lexicon)
    assert [q.text for q in back] == [q.text for q in questions]
    assert [q.qid for q in back] == [q.qid for q in questions]


# -- synthetic generator -----------------------------------------------------

def test_synth_deterministic_and_distinct(lexicon):
    a = synth_corpus(45, seed=3, lexicon=lexicon)
    b = synth_corpus(45, seed=3, lexicon=lexicon)
    assert [q.text for q in a] == [q.text for q in b]
    assert len({q.text for q in a}) == 45
    assert [q.qid for q in a][:2] == ["synth-0000", "synth-0001"]
    c = synth_corpus(45, seed=8, lexicon=lexicon)
    assert [q.text for q in c] != [q.text for q in a]


def test_synth_questions_are_analyzable(lexicon):
    corpus = synth_corpus(45, seed=0, lexicon=lexicon)
    categories = set()
    for q in corpus:
        assert q.numbers, q.text
        assert q.units, q.text
        categories.update(u.category for u in q.units)
    assert {"Length", "Speed", "Time", "Weight", "Currency"} <= categories
    assert any(e.category == "Person" for q in corpus for e in q.entities)
    assert any(e.category == "Place" for q in corpus for e in q.entities)


def test_synth_rejects_bad_n():
    with pytest.raises(ValueError):
        synth_corpus(0)


# -- command line ------------------------------------------------------------

ENC = ("--dim", "16", "--buckets", "4096")


def run_cli(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    out = json.loads(captured.out.strip().splitlines()[-1]) \
        if captured.out.strip() else {}
    err = json.loads(captured.err.strip().splitlines()[-1]) \
        if captured.err.strip() else {}
    return rc, out, err


@pytest.fixture(scope="module")
def cli_artifacts(tmp_path_factory):
    """One pass of the pipeline at toy scale; later tests reuse the files."""
    root = tmp_path_factory.mktemp("cli")
    paths = {"root": root,
             "questions": str(root / "synth" / "questions.jsonl"),
             "pairs": str(root / "aug" / "pairs.jsonl"),
             "triplets": str(root / "tri" / "triplets.jsonl"),
             "checkpoint": str(root / "train" / "checkpoint.bin")}
    assert main(["synth", "--n", "10", "--seed", "0",
                 "--out-dir", str(root / "synth")]) == 0
    assert main(["augment", "--corpus", paths["questions"],
                 "--seed", "11", "--out-dir", str(root / "aug"), *ENC]) == 0
    assert main(["triplets", "--corpus", paths["questions"],
                 "--strategy", "enumerate-all", "--seed", "11",
                 "--out-dir", str(root / "tri"), *ENC]) == 0
    assert main(["train", "--triplets", paths["triplets"],
                 "--epochs", "1", "--batch", "8", "--seed", "0",
                 "--out-dir", str(root / "train"), *ENC]) == 0
    return paths


def test_cli_synth(tmp_path, capsys):
    out_dir = tmp_path / "s"
    rc, out, _ = run_cli(capsys, "synth", "--n", "7", "--seed", "2",
                         "--out-dir", str(out_dir))
    assert rc == 0
    assert out["command"] == "synth" and out["written"] == 7
    lines = (out_dir / "questions.jsonl").read_text().splitlines()
    assert len(lines) == 7


def test_cli_synth_deterministic_bytes(tmp_path, capsys):
    for name in ("r1", "r2"):
        assert main(["synth", "--n", "9", "--seed", "6",
                     "--out-dir", str(tmp_path / name)]) == 0
    capsys.readouterr()
    assert (tmp_path / "r1" / "questions.jsonl").read_bytes() == \
        (tmp_path / "r2" / "questions.jsonl").read_bytes()


def test_cli_augment_summary(cli_artifacts, tmp_path, capsys):
    rc, out, _ = run_cli(capsys, "augment",
                         "--corpus", cli_artifacts["questions"],
                         "--ops", "f2,f3,f8", "--seed", "11",
                         "--out-dir", str(tmp_path), *ENC)
    assert rc == 0
    assert set(out["by_op"]) <= {"f2", "f3", "f8"}
    assert out["pairs"] == sum(out["by_op"].values())
    assert len((tmp_path / "pairs.jsonl").read_text().splitlines()) \
        == out["pairs"]


def test_cli_augment_rejects_unknown_op(cli_artifacts, tmp_path, capsys):
    rc, _, err = run_cli(capsys, "augment",
                         "--corpus", cli_artifacts["questions"],
                         "--ops", "f2,zz", "--out-dir", str(tmp_path), *ENC)
    assert rc == 1
    assert err["error"] == "ValueError" and "zz" in err["message"]


def test_cli_triplets_and_train(cli_artifacts, capsys):
    n = len(open(cli_artifacts["triplets"]).read().splitlines())
    assert n > 0
    assert os.path.exists(cli_artifacts["checkpoint"])
    report = json.load(open(os.path.join(
        os.path.dirname(cli_artifacts["checkpoint"]), "train_report.json")))
    assert report["steps"] == math.ceil(n / 8)
    assert report["config"]["epochs"] == 1


def test_cli_score_pair(cli_artifacts, capsys):
    rc, out, _ = run_cli(capsys, "score",
                         "--anchor", "Alex walked 5 km.",
                         "--candidate", "Alex walked 5 km.",
                         "--checkpoint", cli_artifacts["checkpoint"], *ENC)
    assert rc == 0
    assert out["score"] == pytest.approx(1.0)


def test_cli_score_pairs_file(cli_artifacts, tmp_path, capsys):
    rc, out, _ = run_cli(capsys, "score", "--pairs", cli_artifacts["pairs"],
                         "--checkpoint", cli_artifacts["checkpoint"],
                         "--out-dir", str(tmp_path), *ENC)
    assert rc == 0
    lines = (tmp_path / "scores.jsonl").read_text().splitlines()
    assert len(lines) == out["pairs"]
    row = json.loads(lines[0])
    assert set(row) == {"anchor", "paraphrase", "op", "score"}


def test_cli_score_needs_input(capsys):
    rc, _, err = run_cli(capsys, "score", *ENC)
    assert rc == 1 and err["error"] == "ValueError"


def test_cli_evaluate(cli_artifacts, tmp_path, capsys):
    rc, out, _ = run_cli(capsys, "evaluate", "--pairs",
                         cli_artifacts["pairs"],
                         "--checkpoint", cli_artifacts["checkpoint"],
                         "--out-dir", str(tmp_path), *ENC)
    assert rc == 0
    report = json.load(open(tmp_path / "metrics.json"))
    assert report["weighted"]["f1"] == out["weighted_f1"]
    assert report["mu_sep"] == out["mu_sep"]


def test_cli_testset_then_evaluate_intended(cli_artifacts, tmp_path, capsys):
    rc, out, _ = run_cli(capsys, "build-testset",
                         "--corpus", cli_artifacts["questions"],
                         "--seed", "5", "--out-dir", str(tmp_path))
    assert rc == 0 and out["pairs"] == 20
    rc, out, _ = run_cli(capsys, "evaluate",
                         "--pairs", str(tmp_path / "testset.jsonl"),
                         "--label-source", "intended",
                         "--checkpoint", cli_artifacts["checkpoint"],
                         "--out-dir", str(tmp_path), *ENC)
    assert rc == 0 and out["n_pairs"] == 20


def test_cli_pseudo_label(cli_artifacts, tmp_path, capsys):
    rc, out, _ = run_cli(capsys, "pseudo-label",
                         "--pairs", cli_artifacts["pairs"],
                         "--iota", "0.8",
                         "--checkpoint", cli_artifacts["checkpoint"],
                         "--out-dir", str(tmp_path), *ENC)
    assert rc == 0
    assert out["positive_pct"] + out["negative_pct"] == pytest.approx(100.0)
    assert (tmp_path / "pseudo_labelled.jsonl").exists()


def test_cli_export_embeddings(cli_artifacts, tmp_path, capsys):
    rc, out, _ = run_cli(capsys, "export-embeddings",
                         "--triplets", cli_artifacts["triplets"],
                         "--checkpoint", cli_artifacts["checkpoint"],
                         "--projection", "pca2d",
                         "--out-dir", str(tmp_path), *ENC)
    assert rc == 0
    n_triplets = len(open(cli_artifacts["triplets"]).read().splitlines())
    assert out["rows"] == 3 * n_triplets


def test_cli_gradcheck(capsys):
    rc, out, _ = run_cli(capsys, "gradcheck", "--loss", "triplet",
                         "--batches", "2")
    assert rc == 0
    assert out["passed"] is True
    assert out["results"][0]["max_rel_err"] <= 1e-4


def test_cli_error_contract_missing_file(tmp_path, capsys):
    rc, out, err = run_cli(capsys, "evaluate", "--pairs",
                           str(tmp_path / "nope.jsonl"),
                           "--out-dir", str(tmp_path), *ENC)
    assert rc == 1
    assert out == {}    # nothing on stdout
    assert err["error"] in ("FileNotFoundError", "OSError")
    assert "nope.jsonl" in err["message"]


def test_cli_provider_env_overrides_flag(cli_artifacts, tmp_path, capsys,
                                         monkeypatch):
    monkeypatch.setenv(PROVIDER_ENV, "stdio:missing-paraphraser-xyz")
    rc, _, err = run_cli(capsys, "augment",
                         "--corpus", cli_artifacts["questions"],
                         "--ops", "f1", "--provider", "stub",
                         "--out-dir", str(tmp_path), *ENC)
    assert rc == 1
    assert err["error"] == "ProviderUnavailable"


def test_cli_writes_stay_in_out_dir(tmp_path, monkeypatch, capsys):
    work = tmp_path / "cwd"
    work.mkdir()
    monkeypatch.chdir(work)
    out_dir = tmp_path / "elsewhere"
    assert main(["synth", "--n", "4", "--seed", "1",
                 "--out-dir", str(out_dir)]) == 0
    capsys.readouterr()
    assert os.listdir(work) == []
    assert sorted(os.listdir(out_dir)) == ["questions.jsonl"]
