"""Fine-tuning loop with per-epoch checkpoint selection on dev macro-F1.

Training is single-threaded CPU-deterministic given the seed: weight
initialisation, dropout, and epoch shuffling all come from the seeded
generators, so two runs produce identical metric trajectories.  The chosen
checkpoint is the epoch with the highest dev macro-F1 (earliest on ties).
A JSON run manifest records the config, the per-epoch metrics, and the
chosen epoch.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from .corpus_io import LABEL_INDEX, LABELS, read_corpus
from .encoders import TINY, Encoder, build_encoder, collate, featurize, load_encoder_architecture
from .model import FormClassifier
from .preprocess import ReferentInstance, preprocess


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class PlmConfig:
    encoder: str = TINY
    batch_size: int = 16
    head_lr: float = 1e-3
    body_lr: float = 2e-5
    freeze_body: bool = False
    dropout: float = 0.5
    head_hidden: int = 256
    epochs: int = 20
    seed: int = 0
    max_len: int = 128
    tiny_hidden: int = 64
    tiny_layers: int = 2

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise TrainingError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 <= self.dropout < 1.0:
            raise TrainingError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.head_hidden < 1:
            raise TrainingError(f"head_hidden must be >= 1, got {self.head_hidden}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")


def macro_f1(y_true, y_pred) -> float:
    """Unweighted mean F1 over the fixed three-label set; 0/0 counts as 0."""
    f1s = []
    for c in range(len(LABELS)):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        pred = sum(1 for p in y_pred if p == c)
        true = sum(1 for t in y_true if t == c)
        precision = tp / pred if pred else 0.0
        recall = tp / true if true else 0.0
        f1s.append(
            0.0 if precision + recall == 0
            else 2 * precision * recall / (precision + recall)
        )
    return float(np.mean(f1s))


def _predict_logits(model, encoded, batch_size, pad_id) -> torch.Tensor:
    model.eval()
    outputs = []
    with torch.no_grad():
        for start in range(0, len(encoded), batch_size):
            batch = encoded[start:start + batch_size]
            input_ids, attention, first, last, _ = collate(batch, pad_id)
            outputs.append(model(input_ids, attention, first, last))
    return torch.cat(outputs)


def finetune(
    train_instances: list[ReferentInstance],
    dev_instances: list[ReferentInstance],
    config: PlmConfig,
    out_dir: str | Path,
) -> dict:
    """Fine-tune on train, select by dev macro-F1, write the checkpoint."""
    if not train_instances or not dev_instances:
        raise TrainingError("train and dev instance sets must be non-empty")
    torch.manual_seed(config.seed)
    torch.set_num_threads(1)

    encoder = build_encoder(
        config.encoder,
        train_instances=train_instances + dev_instances,
        seed=config.seed,
        max_len=config.max_len,
        tiny_hidden=config.tiny_hidden,
        tiny_layers=config.tiny_layers,
    )
    model = FormClassifier(encoder.model, config.head_hidden, config.dropout)
    pad_id = encoder.tokenizer.pad_token_id
    train_enc = [featurize(encoder, i, LABEL_INDEX) for i in train_instances]
    dev_enc = [featurize(encoder, i, LABEL_INDEX) for i in dev_instances]
    dev_gold = [e.label for e in dev_enc]

    head_params = [p for name, p in model.named_parameters()
                   if not name.startswith("encoder.")]
    groups = [{"params": head_params, "lr": config.head_lr}]
    if config.freeze_body:
        for p in model.encoder.parameters():
            p.requires_grad_(False)
        body_mode = "frozen"
    else:
        groups.append({"params": list(model.encoder.parameters()),
                       "lr": config.body_lr})
        body_mode = f"trained at {config.body_lr}"
    optimizer = torch.optim.AdamW(groups)
    loss_fn = torch.nn.CrossEntropyLoss()

    rng = np.random.RandomState(config.seed)
    history = []
    best_state = None
    best = (-1.0, -1)  # (dev macro-F1, epoch)
    for epoch in range(config.epochs):
        model.train()
        order = rng.permutation(len(train_enc))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [train_enc[i] for i in order[start:start + config.batch_size]]
            input_ids, attention, first, last, labels = collate(batch, pad_id)
            optimizer.zero_grad()
            logits = model(input_ids, attention, first, last)
            loss = loss_fn(logits, labels)
            if not torch.isfinite(loss):
                raise TrainingError("training loss is not finite; lower the "
                                    "learning rate")
            loss.backward()
            optimizer.step()
            epoch_loss += loss.detach().item() * len(batch)
        dev_pred = _predict_logits(model, dev_enc, config.batch_size,
                                   pad_id).argmax(dim=1).tolist()
        score = macro_f1(dev_gold, dev_pred)
        history.append({
            "epoch": epoch,
            "train_loss": epoch_loss / len(train_enc),
            "dev_macro_f1": score,
        })
        if score > best[0]:
            best = (score, epoch)
            best_state = {k: v.detach().clone()
                          for k, v in model.state_dict().items()}

    model.load_state_dict(best_state)
    manifest = {
        "config": asdict(config),
        "seed": config.seed,
        "body_mode": body_mode,
        "epochs": history,
        "chosen_epoch": best[1],
        "chosen_dev_macro_f1": best[0],
    }
    _save_checkpoint(Path(out_dir), model, encoder, config, manifest)
    return manifest


def _save_checkpoint(out_dir: Path, model, encoder: Encoder, config, manifest):
    out_dir.mkdir(parents=True, exist_ok=True)
    encoder.tokenizer.save_pretrained(out_dir / "tokenizer")
    encoder.model.config.save_pretrained(out_dir / "encoder_config")
    torch.save(model.state_dict(), out_dir / "weights.pt")
    (out_dir / "plm_config.json").write_text(
        json.dumps(asdict(config), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_checkpoint(ckpt_dir: str | Path):
    """Rebuild the fine-tuned classifier from a checkpoint directory."""
    from transformers import AutoTokenizer

    ckpt_dir = Path(ckpt_dir)
    config = PlmConfig(**json.loads((ckpt_dir / "plm_config.json").read_text()))
    tokenizer = AutoTokenizer.from_pretrained(ckpt_dir / "tokenizer")
    body = load_encoder_architecture(ckpt_dir / "encoder_config")
    model = FormClassifier(body, config.head_hidden, config.dropout)
    model.load_state_dict(torch.load(ckpt_dir / "weights.pt", weights_only=True))
    model.eval()
    encoder = Encoder(config.encoder, tokenizer, body, config.max_len)
    return model, encoder, config


PREDICTION_HEADER = (
    "doc_id", "mention_id", "gold", "predicted",
    "p_description", "p_name", "p_pronoun",
)


def predictions_tsv(instances: list[ReferentInstance], probs) -> str:
    lines = ["\t".join(PREDICTION_HEADER)]
    for instance, p in zip(instances, probs):
        predicted = LABELS[int(np.argmax(p))]
        lines.append("\t".join([
            instance.doc_id, instance.mention_id, instance.gold, predicted,
            *(f"{x:.6f}" for x in p),
        ]))
    return "\n".join(lines) + "\n"


def predict_corpus(ckpt_dir: str | Path, corpus_path: str | Path) -> str:
    """Predict every mention of a corpus file; returns the interchange TSV."""
    model, encoder, config = load_checkpoint(ckpt_dir)
    torch.set_num_threads(1)
    instances = preprocess(read_corpus(corpus_path))
    encoded = [featurize(encoder, i, LABEL_INDEX) for i in instances]
    logits = _predict_logits(model, encoded, config.batch_size,
                             encoder.tokenizer.pad_token_id)
    probs = torch.softmax(logits, dim=1).numpy()
    return predictions_tsv(instances, probs)
