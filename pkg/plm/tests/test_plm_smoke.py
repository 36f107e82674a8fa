"""End-to-end smoke: fine-tune on the 40-document cue corpus, reach dev
macro-F1 >= 0.8 within 20 epochs on CPU, and have the emitted TSV accepted
unmodified by the benchmark toolkit's evaluate verb."""

import json
import subprocess
import sys

import pytest

from refform_plm.corpus_io import read_corpus
from refform_plm.preprocess import preprocess
from refform_plm.training import PlmConfig, finetune, predict_corpus

from cue_helpers import write_cue_corpus

SMOKE = PlmConfig(encoder="tiny", epochs=20, seed=7, body_lr=2e-3)


@pytest.fixture(scope="module")
def smoke_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("smoke")
    train = write_cue_corpus(root / "train.jsonl", 32, seed=1)
    dev = write_cue_corpus(root / "dev.jsonl", 8, seed=2)
    test = write_cue_corpus(root / "test.jsonl", 10, seed=3)
    ckpt = root / "ckpt"
    manifest = finetune(preprocess(read_corpus(train)),
                        preprocess(read_corpus(dev)), SMOKE, ckpt)
    return root, test, ckpt, manifest


def test_dev_macro_f1_reaches_080_within_20_epochs(smoke_run):
    _, _, _, manifest = smoke_run
    assert len(manifest["epochs"]) <= 20
    assert manifest["chosen_dev_macro_f1"] >= 0.8
    print(f"PLM SMOKE: dev macro-F1 {manifest['chosen_dev_macro_f1']:.4f} "
          f"at epoch {manifest['chosen_epoch']}")


def test_manifest_records_the_run(smoke_run):
    _, _, ckpt, manifest = smoke_run
    on_disk = json.loads((ckpt / "manifest.json").read_text())
    assert on_disk == manifest
    assert on_disk["config"]["batch_size"] == 16
    assert on_disk["config"]["seed"] == 7
    assert [e["epoch"] for e in on_disk["epochs"]] == list(range(20))


def test_emitted_tsv_is_accepted_by_the_benchmark_evaluator(smoke_run, tmp_path):
    root, test, ckpt, _ = smoke_run
    pred = tmp_path / "pred.tsv"
    pred.write_text(predict_corpus(ckpt, test), encoding="utf-8")
    report = tmp_path / "report.json"
    result = subprocess.run(
        [sys.executable, "-m", "refform.cli", "evaluate",
         "--predictions", str(pred), "--corpus", str(test),
         "--out", str(report)],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    scored = json.loads(report.read_text())
    assert scored["n"] == 60
    assert scored["accuracy"] >= 0.8
    print(f"PLM SMOKE: evaluator accuracy {scored['accuracy']:.4f} "
          f"macro-F1 {scored['macro_f1']:.4f}")
