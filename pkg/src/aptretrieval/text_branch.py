"""Query encoder: a bidirectional GRU over per-sentence (or per-token) features.

The query embedding is the elementwise mean of the forward and backward final
hidden states, so its dimension equals the hidden width and matches the scene
embedding width of the joint space.
"""

from __future__ import annotations

import torch
import torch.nn as nn
from torch.nn.utils.rnn import pack_padded_sequence


class QueryEncoder(nn.Module):
    def __init__(self, input_dim: int = 512, hidden_dim: int = 512):
        super().__init__()
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        # Single layer; torch's default init is uniform in +-1/sqrt(hidden_dim).
        self.gru = nn.GRU(
            input_dim, hidden_dim, num_layers=1, bidirectional=True, batch_first=True
        )

    @property
    def output_dim(self) -> int:
        return self.hidden_dim

    def forward(self, sequences: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        """sequences: B x S_max x input_dim (zero-padded); lengths: B true lengths.

        Returns B x hidden_dim query embeddings.
        """
        if sequences.dim() != 3 or sequences.shape[-1] != self.input_dim:
            raise ValueError(
                f"expected B x S x {self.input_dim} input, got shape {tuple(sequences.shape)}"
            )
        packed = pack_padded_sequence(
            sequences, lengths.cpu().to(torch.int64), batch_first=True, enforce_sorted=False
        )
        _, h_n = self.gru(packed)  # (2, B, H): forward and backward final states
        return 0.5 * (h_n[0] + h_n[1])

    def encode_one(self, sequence: torch.Tensor) -> torch.Tensor:
        """Convenience for a single S x input_dim sequence."""
        if sequence.dim() != 2:
            raise ValueError("expected an S x F matrix")
        out = self.forward(
            sequence.unsqueeze(0), torch.tensor([sequence.shape[0]], dtype=torch.int64)
        )
        return out[0]
