"""Encoder construction and instance featurization.

Three encoder specs are supported: the two pretrained presets
(``bert-base-cased`` and ``roberta-base``, loaded from the model hub or a
local cache) and ``tiny``, a small randomly initialised BERT-architecture
encoder with a WordPiece vocabulary harvested from the training corpus.
``tiny`` exists so the whole fine-tuning path runs offline on CPU.

Documents longer than the context window are windowed around the referent
with symmetric context.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.pre_tokenizers import BertPreTokenizer
from tokenizers.processors import TemplateProcessing
from transformers import (
    AutoConfig,
    AutoModel,
    AutoTokenizer,
    BertConfig,
    BertModel,
    PreTrainedTokenizerFast,
)

from .preprocess import ReferentInstance

TINY = "tiny"
PRETRAINED_PRESETS = ("bert-base-cased", "roberta-base")
SPECIALS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")


class EncoderError(ValueError):
    pass


def wordpiece_tokenizer(vocab_tokens: list[str]) -> PreTrainedTokenizerFast:
    """Whole-word WordPiece tokenizer over an explicit vocabulary."""
    vocab = {token: i for i, token in enumerate(SPECIALS)}
    for token in vocab_tokens:
        vocab.setdefault(token, len(vocab))
    backend = Tokenizer(WordPiece(vocab, unk_token="[UNK]",
                                  max_input_chars_per_word=100))
    backend.pre_tokenizer = BertPreTokenizer()
    backend.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]", pad_token="[PAD]", cls_token="[CLS]",
        sep_token="[SEP]", mask_token="[MASK]",
    )


def corpus_vocabulary(instances: list[ReferentInstance]) -> list[str]:
    tokens: set[str] = set()
    for instance in instances:
        tokens.update(instance.text.split(" "))
    return sorted(tokens)


@dataclass
class Encoder:
    spec: str
    tokenizer: PreTrainedTokenizerFast
    model: torch.nn.Module
    max_len: int

    @property
    def hidden_size(self) -> int:
        return self.model.config.hidden_size


def build_encoder(
    spec: str,
    train_instances: list[ReferentInstance] | None = None,
    seed: int = 0,
    max_len: int = 128,
    tiny_hidden: int = 64,
    tiny_layers: int = 2,
) -> Encoder:
    if spec == TINY:
        if not train_instances:
            raise EncoderError("the tiny encoder needs training instances "
                               "to harvest its vocabulary")
        tokenizer = wordpiece_tokenizer(corpus_vocabulary(train_instances))
        config = BertConfig(
            vocab_size=len(tokenizer),
            hidden_size=tiny_hidden,
            num_hidden_layers=tiny_layers,
            num_attention_heads=4,
            intermediate_size=2 * tiny_hidden,
            max_position_embeddings=max_len,
        )
        torch.manual_seed(seed)
        return Encoder(spec, tokenizer, BertModel(config), max_len)
    tokenizer = AutoTokenizer.from_pretrained(spec)
    model = AutoModel.from_pretrained(spec)
    window = min(int(model.config.max_position_embeddings), 512)
    return Encoder(spec, tokenizer, model, window)


def load_encoder_architecture(config_dir) -> torch.nn.Module:
    """Rebuild an encoder skeleton from a saved config (weights come from
    the checkpoint state dict, so no hub access is needed)."""
    return AutoModel.from_config(AutoConfig.from_pretrained(config_dir))


@dataclass(frozen=True)
class EncodedInstance:
    input_ids: tuple[int, ...]
    first_index: int
    last_index: int
    label: int


def locate_referent(offsets, char_start: int, char_end: int) -> tuple[int, int]:
    """First and last subword overlapping the referent's character span."""
    covering = [
        i for i, (s, e) in enumerate(offsets)
        if e > s and s < char_end and e > char_start
    ]
    if not covering:
        raise EncoderError(
            f"referent span [{char_start}, {char_end}) maps to no tokens"
        )
    return covering[0], covering[-1]


def featurize(
    encoder: Encoder, instance: ReferentInstance, label_index: dict[str, int]
) -> EncodedInstance:
    enc = encoder.tokenizer(
        instance.text, return_offsets_mapping=True, add_special_tokens=False
    )
    ids = enc["input_ids"]
    first, last = locate_referent(
        enc["offset_mapping"], instance.char_start, instance.char_end
    )
    budget = encoder.max_len - 2
    if len(ids) > budget:
        center = (first + last) // 2
        window_start = max(0, min(center - budget // 2, len(ids) - budget))
        if first < window_start or last >= window_start + budget:
            # referent longer than the window: keep its head
            window_start = first
        ids = ids[window_start:window_start + budget]
        first -= window_start
        last = min(last - window_start, len(ids) - 1)
    cls = encoder.tokenizer.cls_token_id
    sep = encoder.tokenizer.sep_token_id
    return EncodedInstance(
        input_ids=tuple([cls, *ids, sep]),
        first_index=first + 1,
        last_index=last + 1,
        label=label_index.get(instance.gold, -1),
    )


def collate(batch: list[EncodedInstance], pad_id: int):
    width = max(len(e.input_ids) for e in batch)
    input_ids = torch.full((len(batch), width), pad_id, dtype=torch.long)
    attention = torch.zeros((len(batch), width), dtype=torch.long)
    for i, encoded in enumerate(batch):
        n = len(encoded.input_ids)
        input_ids[i, :n] = torch.tensor(encoded.input_ids, dtype=torch.long)
        attention[i, :n] = 1
    first = torch.tensor([e.first_index for e in batch], dtype=torch.long)
    last = torch.tensor([e.last_index for e in batch], dtype=torch.long)
    labels = torch.tensor([e.label for e in batch], dtype=torch.long)
    return input_ids, attention, first, last, labels
