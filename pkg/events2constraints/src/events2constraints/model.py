"""A small encoder-decoder transformer for constraint generation.

No pretrained weights are involved: the sandbox has no model hub access, so
the architecture presets below are trained from random initialization. At
toy scale that is enough to memorize a repository's constraints, which is
what the end-to-end pipeline check needs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, asdict

import torch
from torch import nn

# torch's encoder fast path emits a prototype-stage notice the caller can't
# act on; everything works on the stable path too
warnings.filterwarnings(
    "ignore", message="The PyTorch API of nested tensors is in prototype stage"
)

ARCH_PRESETS = {
    "tiny": dict(d_model=128, nhead=4, num_layers=2, dim_feedforward=256),
    "small": dict(d_model=256, nhead=8, num_layers=3, dim_feedforward=512),
}

MAX_POSITIONS = 160


@dataclass(frozen=True)
class GenConfig:
    """Training and decoding knobs.

    base_model picks an architecture preset, not a pretrained checkpoint.
    lr defaults higher than typical fine-tuning rates because training
    starts from random weights.
    """

    base_model: str = "tiny"
    epochs: int = 200
    batch_size: int = 32
    lr: float = 3e-4
    beams: int = 10
    max_output_len: int = 32
    seed: int = 0
    patience: int = 20
    val_fraction: float = 0.1
    dropout: float = 0.1
    deterministic: bool = True

    def __post_init__(self) -> None:
        if self.beams < 1:
            raise ValueError("beams must be >= 1")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.base_model not in ARCH_PRESETS:
            raise ValueError(f"unknown base_model {self.base_model!r}; options: {sorted(ARCH_PRESETS)}")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


class Seq2SeqTransformer(nn.Module):
    def __init__(self, vocab_size: int, pad_id: int, arch: str = "tiny", dropout: float = 0.1):
        super().__init__()
        preset = ARCH_PRESETS[arch]
        d_model = preset["d_model"]
        self.pad_id = pad_id
        self.token_embedding = nn.Embedding(vocab_size, d_model, padding_idx=pad_id)
        self.position_embedding = nn.Embedding(MAX_POSITIONS, d_model)
        self.transformer = nn.Transformer(
            d_model=d_model,
            nhead=preset["nhead"],
            num_encoder_layers=preset["num_layers"],
            num_decoder_layers=preset["num_layers"],
            dim_feedforward=preset["dim_feedforward"],
            dropout=dropout,
            batch_first=True,
        )
        self.output_projection = nn.Linear(d_model, vocab_size)

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        return self.token_embedding(ids) + self.position_embedding(positions)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        """Logits over the vocabulary for each target position."""
        causal = nn.Transformer.generate_square_subsequent_mask(
            tgt_in.size(1), device=tgt_in.device, dtype=torch.bool
        )
        hidden = self.transformer(
            self._embed(src),
            self._embed(tgt_in),
            tgt_mask=causal,
            src_key_padding_mask=src == self.pad_id,
            tgt_key_padding_mask=tgt_in == self.pad_id,
            memory_key_padding_mask=src == self.pad_id,
        )
        return self.output_projection(hidden)
