"""DDPM noise-prediction training for the tiny predictor.

The corruption schedule is pinned to the consumer's defaults (1000 linear
steps from 1e-4 to 0.02) and recorded in the export header; training is
float32 with AdamW at fixed hyperparameters. Everything is seeded, so a
rerun on the same platform reproduces the weights bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .model import TinyEps

SCHEDULE = {"steps": 1000, "eta_start": 1e-4, "eta_end": 0.02}
OPTIMIZER = {"name": "AdamW", "lr": 1e-3, "betas": (0.9, 0.999), "weight_decay": 1e-4}
DEFAULT_BATCH_SIZE = 128


def alpha_bar_table(steps: int = None) -> np.ndarray:
    steps = SCHEDULE["steps"] if steps is None else steps
    eta = np.linspace(SCHEDULE["eta_start"], SCHEDULE["eta_end"], steps)
    return np.cumprod(1.0 - eta)


@dataclass
class TrainingResult:
    model: TinyEps
    final_mse: float
    loss_history: list[float]
    provenance: dict


def _corrupt_batch(x0, t_idx, a_bar, generator):
    eps = torch.randn(x0.shape, generator=generator, dtype=torch.float32)
    ab = a_bar[t_idx][:, None, None, None]
    x_t = torch.sqrt(ab) * x0 + torch.sqrt(1.0 - ab) * eps
    return x_t, eps


def train_toy_ddpm(
    images: np.ndarray,
    epochs: int,
    seed: int,
    feature_width: int = 32,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> TrainingResult:
    """Train on (N, C, H, W) float32 images in [-1, 1]; returns the model and
    the final held-in noise-prediction MSE."""
    if images.ndim != 4:
        raise ValueError(f"expected (N, C, H, W) images, got shape {images.shape}")
    torch.manual_seed(seed)
    generator = torch.Generator().manual_seed(seed * 7919 + 1)

    model = TinyEps(feature_width=feature_width, channels=images.shape[1])
    model.train()
    opt = torch.optim.AdamW(
        model.parameters(),
        lr=OPTIMIZER["lr"],
        betas=OPTIMIZER["betas"],
        weight_decay=OPTIMIZER["weight_decay"],
    )
    data = torch.from_numpy(np.ascontiguousarray(images))
    a_bar = torch.from_numpy(alpha_bar_table()).to(torch.float32)
    steps = SCHEDULE["steps"]

    losses: list[float] = []
    for epoch in range(epochs):
        perm = torch.randperm(data.shape[0], generator=generator)
        for start in range(0, data.shape[0], batch_size):
            x0 = data[perm[start : start + batch_size]]
            t_idx = torch.randint(0, steps, (x0.shape[0],), generator=generator)
            x_t, eps = _corrupt_batch(x0, t_idx, a_bar, generator)
            pred = model(x_t, (t_idx + 1).to(torch.float32))
            loss = torch.nn.functional.mse_loss(pred, eps)
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"training diverged (loss={loss.item()}) at epoch {epoch}, seed {seed}"
                )
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(float(loss.item()))

    final_mse = evaluate_mse(model, images, seed=seed + 1)
    provenance = {
        "schedule": dict(SCHEDULE),
        "optimizer": {**OPTIMIZER, "batch_size": batch_size},
        "epochs": epochs,
        "seed": seed,
        "train_images": int(images.shape[0]),
        "final_mse": final_mse,
    }
    return TrainingResult(model=model, final_mse=final_mse, loss_history=losses, provenance=provenance)


def evaluate_mse(model: TinyEps, images: np.ndarray, seed: int, max_images: int = 512) -> float:
    """Noise-prediction MSE over uniformly drawn steps with fixed draws.

    The zero predictor scores exactly E[eps^2] = 1, the reference floor.
    """
    model.eval()
    generator = torch.Generator().manual_seed(seed)
    data = torch.from_numpy(np.ascontiguousarray(images[:max_images]))
    a_bar = torch.from_numpy(alpha_bar_table()).to(torch.float32)
    total, count = 0.0, 0
    with torch.no_grad():
        for start in range(0, data.shape[0], 128):
            x0 = data[start : start + 128]
            t_idx = torch.randint(0, SCHEDULE["steps"], (x0.shape[0],), generator=generator)
            x_t, eps = _corrupt_batch(x0, t_idx, a_bar, generator)
            pred = model(x_t, (t_idx + 1).to(torch.float32))
            total += float(((pred - eps) ** 2).sum())
            count += eps.numel()
    model.train()
    return total / count
