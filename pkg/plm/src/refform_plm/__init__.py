"""Transformer fine-tuning for referential-form selection.

Reads the canonical corpus JSONL, substitutes every referent with its
proper name, fine-tunes a pretrained (or tiny offline) encoder with a small
classification head, and writes predictions in the interchange TSV scored
by the benchmark toolkit.
"""

from .corpus_io import LABELS, read_corpus
from .encoders import build_encoder, featurize, locate_referent
from .model import FormClassifier, referent_representation
from .preprocess import ReferentInstance, preprocess, substitute_document
from .training import (
    PlmConfig,
    finetune,
    load_checkpoint,
    macro_f1,
    predict_corpus,
)

__version__ = "0.1.0"
