"""Slow statistical check: unconditional samples drawn through the consumer
from the exported weights have sane per-pixel variance."""

from pathlib import Path

import numpy as np
import pytest

ARTIFACTS = Path(__file__).resolve().parents[1] / "artifacts"


@pytest.mark.slow
def test_consumer_drawn_samples_match_toy_data_variance():
    """256 ancestral 32x32 samples (full 1000-step schedule) through the
    consumer's forward pass: pooled pixel variance within [0.2, 1.5] times
    the toy-data variance."""
    vbdenoise = pytest.importorskip("vbdenoise")
    from vbdenoise.tiny_net import forward

    from toy_prior_trainer import ToyDatasetSpec, generate_toy_dataset

    weights_path = ARTIFACTS / "toy_weights.teps"
    if not weights_path.exists():
        pytest.skip("artifacts not generated")
    weights = vbdenoise.read_tiny_weights(weights_path)
    sched = vbdenoise.build_schedule(1000)

    rng = np.random.default_rng(2718)
    batch = 256
    x = rng.standard_normal((batch, 3, 32, 32))
    for t in range(1000, 0, -1):
        eps = forward(weights, x.astype(np.float32), float(t)).astype(np.float64)
        mu = (x - (sched.eta_at(t) / np.sqrt(1.0 - sched.a_bar_at(t))) * eps) / np.sqrt(sched.a_at(t))
        if t > 1:
            x = mu + np.sqrt(sched.sigma2_at(t)) * rng.standard_normal(x.shape)
        else:
            x = mu

    data = generate_toy_dataset(ToyDatasetSpec(count=512, size=32, seed=7))
    ratio = float(x.var() / data.var())
    assert 0.2 <= ratio <= 1.5, f"sample/data variance ratio {ratio:.3f}"
