"""Procedural toy images: smooth random fields plus flat-colored shapes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


@dataclass(frozen=True)
class ToyDatasetSpec:
    count: int
    size: int = 32
    channels: int = 3
    # fraction of images built from flat-colored rectangles and discs;
    # the rest are band-limited Gaussian random fields
    shape_fraction: float = 0.5
    seed: int = 7

    def __post_init__(self):
        if self.count < 1 or self.size < 8:
            raise ValueError(f"need count >= 1 and size >= 8, got {self.count}, {self.size}")
        if not 0.0 <= self.shape_fraction <= 1.0:
            raise ValueError(f"shape_fraction {self.shape_fraction} outside [0, 1]")


def _rng(spec: ToyDatasetSpec) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed)))


def _smooth_field(rng, size, channels):
    sigma = rng.uniform(2.0, 6.0)
    f = ndimage.gaussian_filter(rng.standard_normal((channels, size, size)), sigma=sigma, axes=(1, 2))
    f /= max(np.abs(f).max(), 1e-9)
    return f * rng.uniform(0.3, 0.95)


def _shape_image(rng, size, channels):
    img = np.tile(rng.uniform(-0.9, 0.9, (channels, 1, 1)), (1, size, size))
    yy, xx = np.mgrid[0:size, 0:size]
    for _ in range(rng.integers(1, 5)):
        color = rng.uniform(-0.95, 0.95, channels)
        if rng.random() < 0.5:
            x0, y0 = rng.integers(0, size - 4, 2)
            w, h = rng.integers(3, size // 2 + 1, 2)
            region = (yy >= y0) & (yy < y0 + h) & (xx >= x0) & (xx < x0 + w)
        else:
            cy, cx = rng.integers(3, size - 3, 2)
            r = rng.integers(2, size // 3 + 1)
            region = (yy - cy) ** 2 + (xx - cx) ** 2 <= r**2
        img[:, region] = color[:, None]
    return img


def generate_toy_dataset(spec: ToyDatasetSpec) -> np.ndarray:
    """Deterministic (count, C, H, W) float32 batch with values in [-1, 1]."""
    rng = _rng(spec)
    images = np.empty((spec.count, spec.channels, spec.size, spec.size), dtype=np.float32)
    for i in range(spec.count):
        if rng.random() < spec.shape_fraction:
            img = _shape_image(rng, spec.size, spec.channels)
        else:
            img = _smooth_field(rng, spec.size, spec.channels)
        images[i] = np.clip(img, -1.0, 1.0).astype(np.float32)
    return images
