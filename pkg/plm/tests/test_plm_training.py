import json

import pytest

from refform_plm.corpus_io import read_corpus
from refform_plm.preprocess import preprocess
from refform_plm.training import (
    PlmConfig,
    TrainingError,
    finetune,
    macro_f1,
    predict_corpus,
)

from cue_helpers import write_cue_corpus

QUICK = dict(encoder="tiny", epochs=4, seed=3, body_lr=2e-3,
             tiny_hidden=32, max_len=96)


@pytest.fixture(scope="module")
def cue_paths(tmp_path_factory):
    root = tmp_path_factory.mktemp("cue")
    return {
        "train": write_cue_corpus(root / "train.jsonl", 10, seed=1),
        "dev": write_cue_corpus(root / "dev.jsonl", 4, seed=2),
        "test": write_cue_corpus(root / "test.jsonl", 4, seed=5),
    }


def _instances(path):
    return preprocess(read_corpus(path))


class TestMacroF1:
    def test_perfect(self):
        assert macro_f1([0, 1, 2, 1], [0, 1, 2, 1]) == 1.0

    def test_absent_class_counts_as_zero(self):
        assert macro_f1([1, 1, 2, 2], [1, 1, 2, 2]) == pytest.approx(2 / 3)

    def test_all_wrong(self):
        assert macro_f1([0, 1, 2], [1, 2, 0]) == 0.0


def test_checkpoint_selection_takes_the_best_epoch(cue_paths, tmp_path):
    manifest = finetune(_instances(cue_paths["train"]),
                        _instances(cue_paths["dev"]),
                        PlmConfig(**QUICK), tmp_path / "ckpt")
    scores = [e["dev_macro_f1"] for e in manifest["epochs"]]
    assert len(scores) == QUICK["epochs"]
    assert manifest["chosen_dev_macro_f1"] == max(scores)
    # earliest epoch wins ties
    assert manifest["chosen_epoch"] == scores.index(max(scores))


def test_two_runs_share_the_metric_trajectory(cue_paths, tmp_path):
    results = []
    for name in ("a", "b"):
        manifest = finetune(_instances(cue_paths["train"]),
                            _instances(cue_paths["dev"]),
                            PlmConfig(**QUICK), tmp_path / name)
        results.append(manifest["epochs"])
    assert results[0] == results[1]


def test_checkpoint_reloads_and_predicts(cue_paths, tmp_path):
    ckpt = tmp_path / "ckpt"
    finetune(_instances(cue_paths["train"]), _instances(cue_paths["dev"]),
             PlmConfig(**QUICK), ckpt)
    manifest = json.loads((ckpt / "manifest.json").read_text())
    assert manifest["chosen_epoch"] >= 0
    tsv = predict_corpus(ckpt, cue_paths["test"])
    lines = tsv.splitlines()
    header = lines[0].split("\t")
    assert header == ["doc_id", "mention_id", "gold", "predicted",
                      "p_description", "p_name", "p_pronoun"]
    assert len(lines) - 1 == len(_instances(cue_paths["test"]))
    for line in lines[1:]:
        cells = line.split("\t")
        probs = [float(c) for c in cells[4:]]
        assert abs(sum(probs) - 1.0) <= 1e-4
        assert cells[3] in ("description", "name", "pronoun")


def test_empty_dev_set_rejected(cue_paths, tmp_path):
    with pytest.raises(TrainingError, match="non-empty"):
        finetune(_instances(cue_paths["train"]), [], PlmConfig(**QUICK),
                 tmp_path / "x")


def test_invalid_config_rejected():
    with pytest.raises(TrainingError):
        PlmConfig(epochs=0)
    with pytest.raises(TrainingError):
        PlmConfig(dropout=1.0)
