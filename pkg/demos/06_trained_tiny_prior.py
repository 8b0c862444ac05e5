"""Using a trained convolutional prior instead of the analytic ones.

The trainer package (trainer/) exports weights in the TEPS container; the
library loads them into an independent numpy forward pass, validated by
recorded parity vectors. This demo samples from the trained prior and uses
it to denoise a toy image. It needs the shipped artifacts:

    python -m toy_prior_trainer --out trainer/artifacts/toy_weights.teps \
        --parity trainer/artifacts/parity.json --count 8192 --epochs 6 --seed 7

    python demos/06_trained_tiny_prior.py
"""

import pathlib
import sys

import numpy as np

from vbdenoise import (
    NoiseSpec,
    RestorationConfig,
    build_schedule,
    corrupt,
    denoise,
    load_tiny_predictor,
    psnr,
    sample_unconditional,
    save_image,
)
from vbdenoise.rng import stream

root = pathlib.Path(__file__).resolve().parents[1]
weights_path = root / "trainer" / "artifacts" / "toy_weights.teps"
if not weights_path.exists():
    sys.exit(f"missing {weights_path}; run the trainer first (see module docstring)")

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

predictor = load_tiny_predictor(weights_path)
print(f"loaded tiny predictor: {predictor.channels} channels")

# The trained schedule is the library default (1000 steps).
sched = build_schedule()

# Unconditional samples, including one wider than the training resolution:
# the network is fully convolutional, so it extends as a local texture prior.
for name, (height, width) in {"native_32": (32, 32), "wide_32x96": (32, 96)}.items():
    image = sample_unconditional(predictor, sched, height, width, 3, seed=21)
    save_image(np.clip(image, -1, 1), out_dir / f"tiny_sample_{name}.png")
    print(f"wrote tiny_sample_{name}.png  (std {image.std():.2f})")

# Denoise a toy-style image corrupted with iid Gaussian noise.
from toy_prior_trainer import ToyDatasetSpec, generate_toy_dataset  # noqa: E402

x0 = generate_toy_dataset(ToyDatasetSpec(count=1, size=32, seed=321))[0].transpose(1, 2, 0).astype(float)
sigma = 0.25
y0 = corrupt(x0, NoiseSpec.gaussian(sigma), stream(4, 0))

config = RestorationConfig(beta=sigma**2, kernel_scale=1.0, T=1000, seed=3, enable_rectify=False)
result = denoise(y0, predictor, config)
print(f"noisy PSNR:    {psnr(x0, np.clip(y0, -1, 1), peak=2.0):.2f} dB")
print(f"restored PSNR: {psnr(x0, result.image, peak=2.0):.2f} dB")
save_image(x0, out_dir / "tiny_clean.png")
save_image(np.clip(y0, -1, 1), out_dir / "tiny_noisy.png")
save_image(result.image, out_dir / "tiny_restored.png")
print(f"\nimages in {out_dir}")
