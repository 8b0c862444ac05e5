"""Torch implementation of the tiny-eps-v1 noise predictor.

This mirrors, layer for layer, the frozen architecture the consumer
implements independently; the exported weights plus recorded parity
vectors pin both sides together. Embedding angles are computed in float64
and cast, so the two implementations agree to float32 precision.
"""

from __future__ import annotations

import torch
from torch import nn

TIME_EMB_DIM = 64
ARCHITECTURE = "tiny-eps-v1"


def time_embedding(t: torch.Tensor, dim: int = TIME_EMB_DIM) -> torch.Tensor:
    half = dim // 2
    freqs = 10000.0 ** (-torch.arange(half, dtype=torch.float64) / (half - 1))
    angles = t.to(torch.float64)[:, None] * freqs[None, :]
    return torch.cat([torch.sin(angles), torch.cos(angles)], dim=1).to(torch.float32)


class ResidualBlock(nn.Module):
    def __init__(self, width: int):
        super().__init__()
        self.conv1 = nn.Conv2d(width, width, 3, padding=1)
        self.time_proj = nn.Linear(width, width)
        self.conv2 = nn.Conv2d(width, width, 3, padding=1)

    def forward(self, h: torch.Tensor, tfeat: torch.Tensor) -> torch.Tensor:
        u = torch.nn.functional.silu(h)
        u = self.conv1(u)
        u = u + self.time_proj(tfeat)[:, :, None, None]
        u = torch.nn.functional.silu(u)
        u = self.conv2(u)
        return h + u


class TinyEps(nn.Module):
    def __init__(self, feature_width: int = 32, channels: int = 3):
        super().__init__()
        self.feature_width = feature_width
        self.channels = channels
        self.time_w1 = nn.Linear(TIME_EMB_DIM, feature_width)
        self.time_w2 = nn.Linear(feature_width, feature_width)
        self.stem = nn.Conv2d(channels, feature_width, 3, padding=1)
        self.block1 = ResidualBlock(feature_width)
        self.block2 = ResidualBlock(feature_width)
        self.head = nn.Conv2d(feature_width, channels, 3, padding=1)

    def forward(self, x: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        tfeat = self.time_w2(torch.nn.functional.silu(self.time_w1(time_embedding(t))))
        h = self.stem(x)
        h = self.block1(h, tfeat)
        h = self.block2(h, tfeat)
        return self.head(torch.nn.functional.silu(h))

    def export_tensors(self) -> dict:
        """Weights in the canonical container naming, as float32 numpy arrays."""
        pairs = {
            "time_mlp.w1": self.time_w1.weight,
            "time_mlp.b1": self.time_w1.bias,
            "time_mlp.w2": self.time_w2.weight,
            "time_mlp.b2": self.time_w2.bias,
            "stem.w": self.stem.weight,
            "stem.b": self.stem.bias,
            "head.w": self.head.weight,
            "head.b": self.head.bias,
        }
        for idx, block in ((1, self.block1), (2, self.block2)):
            pairs[f"block{idx}.conv1.w"] = block.conv1.weight
            pairs[f"block{idx}.conv1.b"] = block.conv1.bias
            pairs[f"block{idx}.time_proj.w"] = block.time_proj.weight
            pairs[f"block{idx}.time_proj.b"] = block.time_proj.bias
            pairs[f"block{idx}.conv2.w"] = block.conv2.weight
            pairs[f"block{idx}.conv2.b"] = block.conv2.bias
        return {name: p.detach().cpu().numpy().astype("float32") for name, p in pairs.items()}
