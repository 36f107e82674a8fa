"""CLI: fine-tune on corpus files, predict to the interchange TSV.

    refform-plm preprocess --corpus c.jsonl --out instances.jsonl
    refform-plm train --train tr.jsonl --dev dev.jsonl --out ckpt/
    refform-plm predict --checkpoint ckpt/ --corpus test.jsonl --out pred.tsv

The prediction TSV is scored by the benchmark toolkit's ``evaluate`` verb.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import fields
from pathlib import Path

from .corpus_io import CorpusFormatError, read_corpus
from .encoders import TINY, EncoderError
from .preprocess import PreprocessError, preprocess
from .training import PlmConfig, TrainingError, finetune, predict_corpus


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_preprocess(args) -> int:
    instances = preprocess(read_corpus(args.corpus))
    lines = [
        json.dumps({
            "doc_id": i.doc_id, "mention_id": i.mention_id, "text": i.text,
            "char_start": i.char_start, "char_end": i.char_end, "gold": i.gold,
        }, ensure_ascii=False)
        for i in instances
    ]
    _write_atomic(Path(args.out), "\n".join(lines) + "\n")
    print(f"wrote {len(instances)} instances to {args.out}")
    return 0


def _config_from_args(args) -> PlmConfig:
    overrides = {}
    for field in fields(PlmConfig):
        value = getattr(args, field.name, None)
        if value is not None:
            overrides[field.name] = value
    return PlmConfig(**overrides)


def cmd_train(args) -> int:
    train_instances = preprocess(read_corpus(args.train))
    dev_instances = preprocess(read_corpus(args.dev))
    config = _config_from_args(args)
    manifest = finetune(train_instances, dev_instances, config, args.out)
    print(
        f"chose epoch {manifest['chosen_epoch']} "
        f"(dev macro-F1 {manifest['chosen_dev_macro_f1']:.4f}); "
        f"checkpoint in {args.out}"
    )
    return 0


def cmd_predict(args) -> int:
    tsv = predict_corpus(args.checkpoint, args.corpus)
    _write_atomic(Path(args.out), tsv)
    print(f"wrote {len(tsv.splitlines()) - 1} predictions to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refform-plm",
        description="Transformer fine-tuning for referential-form selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="write substituted instances")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="fine-tune and checkpoint")
    p.add_argument("--train", required=True, help="training corpus JSONL")
    p.add_argument("--dev", required=True, help="development corpus JSONL")
    p.add_argument("--encoder", dest="encoder",
                   help=f"'{TINY}', 'bert-base-cased', or 'roberta-base'")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--head-lr", dest="head_lr", type=float)
    p.add_argument("--body-lr", dest="body_lr", type=float)
    p.add_argument("--freeze-body", dest="freeze_body", action="store_const",
                   const=True)
    p.add_argument("--dropout", type=float)
    p.add_argument("--head-hidden", dest="head_hidden", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-len", dest="max_len", type=int)
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write the prediction TSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CorpusFormatError, EncoderError, PreprocessError, TrainingError,
            ValueError, OSError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
