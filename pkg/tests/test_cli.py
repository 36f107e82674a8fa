import json
import subprocess
import sys

import pytest

from refform.cli import main
from refform.predfile import read_prediction_file


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert run(["synth", "--docs", 60, "--seed", 7, "--out", out]) == 0
    return out


@pytest.fixture(scope="module")
def split_dir(tmp_path_factory, synth_dir):
    out = tmp_path_factory.mktemp("split")
    assert run([
        "split", "--corpus", synth_dir / "corpus.jsonl",
        "--ratios", "0.7,0.15,0.15", "--seed", 7, "--out", out,
    ]) == 0
    return out


def test_synth_is_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["synth", "--docs", 15, "--seed", 3, "--out", a]) == 0
    assert run(["synth", "--docs", 15, "--seed", 3, "--out", b]) == 0
    assert (a / "corpus.jsonl").read_bytes() == (b / "corpus.jsonl").read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()


def test_stats_matches_generator_manifest(synth_dir, tmp_path, capsys):
    out = tmp_path / "stats"
    assert run(["stats", "--corpus", synth_dir / "corpus.jsonl", "--out", out]) == 0
    manifest = json.loads((synth_dir / "manifest.json").read_text())
    stats = json.loads((out / "stats.json").read_text())
    assert stats == manifest["stats"]
    assert (out / "form_distribution.png").exists()


def test_stats_rejects_empty_file(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert run(["stats", "--corpus", empty]) == 1
    assert "error: stats" in capsys.readouterr().err


def test_data_dir_env_var_resolves_corpus(synth_dir, monkeypatch, capsys):
    monkeypatch.setenv("REFFORM_DATA_DIR", str(synth_dir))
    assert run(["stats", "--corpus", "corpus.jsonl"]) == 0


def test_split_writes_three_parts_and_assignment(split_dir):
    lines = (split_dir / "assignment.tsv").read_text().splitlines()
    assert len(lines) == 60
    parts = {line.split("\t")[1] for line in lines}
    assert parts == {"train", "dev", "test"}
    assert (split_dir / "train.jsonl").exists()


def test_featurize_writes_header(split_dir, tmp_path):
    out = tmp_path / "features.tsv"
    assert run([
        "featurize", "--corpus", split_dir / "train.jsonl",
        "--config", "cnts", "--out", out,
    ]) == 0
    header = out.read_text().splitlines()[0].split("\t")
    assert header[:3] == ["doc_id", "mention_id", "gold"]
    assert "gram_role" in header


@pytest.fixture(scope="module")
def knn_pipeline(tmp_path_factory, split_dir):
    out = tmp_path_factory.mktemp("pipeline")
    model = out / "model.json"
    preds = out / "predictions.tsv"
    report = out / "report.json"
    assert run([
        "train", "--corpus", split_dir / "train.jsonl", "--config", "cnts",
        "--algorithm", "knn", "--hyper", "k=3", "--out", model,
    ]) == 0
    assert run([
        "predict", "--model", model, "--corpus", split_dir / "test.jsonl",
        "--out", preds,
    ]) == 0
    assert run([
        "evaluate", "--predictions", preds,
        "--corpus", split_dir / "test.jsonl", "--out", report,
    ]) == 0
    return out


def test_trained_knn_scores_high_on_separable_fixture(knn_pipeline):
    report = json.loads((knn_pipeline / "report.json").read_text())
    assert report["accuracy"] >= 0.9


def test_prediction_file_validates(knn_pipeline):
    predictions, gold = read_prediction_file(knn_pipeline / "predictions.tsv")
    assert predictions
    for pred in predictions:
        assert abs(sum(pred.probs) - 1.0) <= 1e-4


def test_gold_identical_predictions_score_one(knn_pipeline, split_dir, tmp_path):
    source = (knn_pipeline / "predictions.tsv").read_text().splitlines()
    rows = [source[0]]
    for line in source[1:]:
        cells = line.split("\t")
        gold = cells[2]
        probs = {"description": 0, "name": 1, "pronoun": 2}
        p = ["0.000000"] * 3
        p[probs[gold]] = "1.000000"
        rows.append("\t".join(cells[:3] + [gold] + p))
    perfect = tmp_path / "perfect.tsv"
    perfect.write_text("\n".join(rows) + "\n")
    report = tmp_path / "report.json"
    assert run([
        "evaluate", "--predictions", perfect,
        "--corpus", split_dir / "test.jsonl", "--out", report,
    ]) == 0
    assert json.loads(report.read_text())["accuracy"] == 1.0


def test_missing_mention_aborts_without_partial_output(
    knn_pipeline, split_dir, tmp_path, capsys
):
    source = (knn_pipeline / "predictions.tsv").read_text().splitlines()
    dropped_id = source[1].split("\t")[1]
    truncated = tmp_path / "missing.tsv"
    truncated.write_text("\n".join([source[0]] + source[2:]) + "\n")
    report = tmp_path / "report.json"
    assert run([
        "evaluate", "--predictions", truncated,
        "--corpus", split_dir / "test.jsonl", "--out", report,
    ]) == 1
    err = capsys.readouterr().err
    assert dropped_id in err
    assert not report.exists()


def test_gold_column_must_match_the_corpus(knn_pipeline, split_dir, tmp_path, capsys):
    source = (knn_pipeline / "predictions.tsv").read_text().splitlines()
    cells = source[1].split("\t")
    flipped = {"description": "name", "name": "pronoun", "pronoun": "description"}
    cells[2] = flipped[cells[2]]
    tampered = tmp_path / "tampered.tsv"
    tampered.write_text("\n".join([source[0], "\t".join(cells)] + source[2:]) + "\n")
    assert run([
        "evaluate", "--predictions", tampered,
        "--corpus", split_dir / "test.jsonl",
    ]) == 1
    assert "disagree" in capsys.readouterr().err


def test_rerun_of_pipeline_is_byte_identical(split_dir, tmp_path):
    outputs = []
    for name in ("one", "two"):
        out = tmp_path / name
        out.mkdir()
        assert run([
            "train", "--corpus", split_dir / "train.jsonl", "--config", "isg",
            "--algorithm", "mlp", "--seed", 11, "--hyper", "epochs=8",
            "--out", out / "model.json",
        ]) == 0
        assert run([
            "predict", "--model", out / "model.json",
            "--corpus", split_dir / "dev.jsonl", "--out", out / "pred.tsv",
        ]) == 0
        outputs.append(
            (out / "model.json").read_bytes() + (out / "pred.tsv").read_bytes()
        )
    assert outputs[0] == outputs[1]


def test_compare_on_bundled_scores(tmp_path, capsys):
    out = tmp_path / "cmp"
    assert run(["compare", "--out", out]) == 0
    corr = (out / "correlations.csv").read_text()
    f1_cell = [line for line in corr.splitlines()
               if line.startswith("msr/neg,macro_f1")][0]
    assert "0.9642857142857143" in f1_cell
    rankings = (out / "rankings.txt").read_text()
    assert "UDel = RoBERTa > ICSI > OSU > CNTS > BERT > IS-G" in rankings
    for corpus in ("msr", "neg", "wsj"):
        assert (out / f"bf_{corpus}.csv").exists()
        assert (out / f"bf_{corpus}.png").exists()
    assert (out / "correlations.png").exists()


def test_importance_on_role_determined_corpus(tmp_path, capsys):
    synth = tmp_path / "synth"
    assert run([
        "synth", "--docs", 50, "--seed", 13, "--rules", "role_only",
        "--out", synth,
    ]) == 0
    out = tmp_path / "imp"
    assert run([
        "importance", "--corpus", synth / "corpus.jsonl", "--config", "gbt",
        "--ratios", "0.7,0.15,0.15", "--repeats", 5, "--seed", 3,
        "--hyper", "n_rounds=25", "--out", out,
    ]) == 0
    top_feature = (out / "importance.csv").read_text().splitlines()[1].split(",")[0]
    assert top_feature == "gram_role"
    assert (out / "importance_long.csv").exists()
    assert (out / "importance.png").exists()


def test_compare_from_report_triplets(knn_pipeline, split_dir, tmp_path, capsys):
    report = knn_pipeline / "report.json"
    out = tmp_path / "cmp"
    # two corpora with the same two models: enough shape for rankings,
    # too few shared models for a correlation
    argv = ["compare", "--out", out]
    for model, corpus in (("kA", "c1"), ("kB", "c1"), ("kA", "c2"), ("kB", "c2")):
        argv += ["--report", model, corpus, report]
    assert run(argv) == 1
    assert "share only 2 models" in capsys.readouterr().err
    assert not (out / "correlations.csv").exists()  # atomic: nothing written


def test_compare_report_triplets_success(tmp_path):
    values = {"kA": (0.9, 0.8, 0.85), "kB": (0.7, 0.6, 0.65),
              "kC": (0.5, 0.55, 0.52)}
    out = tmp_path / "cmp"
    argv = ["compare", "--out", out]
    for corpus, bump in (("c1", 0.0), ("c2", 0.02)):
        for model, (acc, f1, wf1) in values.items():
            path = tmp_path / f"{model}_{corpus}.json"
            path.write_text(json.dumps({
                "accuracy": acc + bump, "macro_f1": f1 + bump,
                "weighted_f1": wf1 + bump, "per_class": {}, "n": 100,
            }))
            argv += ["--report", model, corpus, path]
    assert run(argv) == 0
    corr = (out / "correlations.csv").read_text()
    # the same model ordering in both corpora: perfect rank correlation
    assert corr.splitlines()[1].startswith("c1/c2,accuracy,1.0,")
    rankings = (out / "rankings.txt").read_text()
    assert "c1 accuracy: kA > kB > kC" in rankings


def test_split_by_assignment_cli(synth_dir, tmp_path):
    corpus_path = synth_dir / "corpus.jsonl"
    doc_ids = [json.loads(line)["doc_id"]
               for line in corpus_path.read_text().splitlines()]
    assignment = tmp_path / "assign.tsv"
    assignment.write_text("".join(
        f"{doc_id}\t{('train', 'dev', 'test')[i % 3]}\n"
        for i, doc_id in enumerate(doc_ids)
    ))
    out = tmp_path / "split"
    assert run(["split", "--corpus", corpus_path,
                "--assignment", assignment, "--out", out]) == 0
    for part in ("train", "dev", "test"):
        lines = (out / f"{part}.jsonl").read_text().splitlines()
        assert len(lines) == 20


def test_console_script_entry_point(synth_dir):
    result = subprocess.run(
        [sys.executable, "-m", "refform.cli", "stats", "--corpus",
         str(synth_dir / "corpus.jsonl")],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert "documents: 60" in result.stdout
