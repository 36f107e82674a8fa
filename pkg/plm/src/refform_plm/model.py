"""Classification head over referent representations.

The referent representation is the elementwise sum of the first and the
last subword vector of the substituted referent (a single-subword referent
contributes its vector twice).  The head is dropout -> linear -> GELU ->
linear over the three form labels.
"""

from __future__ import annotations

import torch
from torch import nn


def referent_representation(
    hidden: torch.Tensor, first_index: torch.Tensor, last_index: torch.Tensor
) -> torch.Tensor:
    """Sum of the first and last referent subword vectors, per batch row."""
    rows = torch.arange(hidden.size(0), device=hidden.device)
    return hidden[rows, first_index] + hidden[rows, last_index]


class FormClassifier(nn.Module):
    def __init__(self, encoder: nn.Module, head_hidden: int = 256,
                 dropout: float = 0.5):
        super().__init__()
        self.encoder = encoder
        hidden_size = encoder.config.hidden_size
        self.dropout = nn.Dropout(dropout)
        self.fc1 = nn.Linear(hidden_size, head_hidden)
        self.activation = nn.GELU()
        self.fc2 = nn.Linear(head_hidden, 3)

    def forward(self, input_ids, attention_mask, first_index, last_index):
        hidden = self.encoder(
            input_ids=input_ids, attention_mask=attention_mask
        ).last_hidden_state
        rep = referent_representation(hidden, first_index, last_index)
        return self.fc2(self.activation(self.fc1(self.dropout(rep))))
