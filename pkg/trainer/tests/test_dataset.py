import numpy as np
import pytest

from toy_prior_trainer import ToyDatasetSpec, generate_toy_dataset


def test_same_seed_gives_identical_batch():
    spec = ToyDatasetSpec(count=16, size=16, seed=7)
    a = generate_toy_dataset(spec)
    b = generate_toy_dataset(spec)
    assert np.array_equal(a, b)
    c = generate_toy_dataset(ToyDatasetSpec(count=16, size=16, seed=8))
    assert not np.array_equal(a, c)


def test_values_bounded_in_model_range():
    images = generate_toy_dataset(ToyDatasetSpec(count=32, size=16, seed=1))
    assert images.min() >= -1.0 and images.max() <= 1.0
    assert images.dtype == np.float32


def _max_constant_run(row: np.ndarray) -> int:
    best, run = 1, 1
    for a, b in zip(row[:-1], row[1:]):
        run = run + 1 if a == b else 1
        best = max(best, run)
    return best


def test_zero_shape_fraction_gives_pure_smooth_fields():
    """Run-length oracle: band-limited fields almost surely have no run of
    exactly equal neighbors, unlike flat-colored shapes."""
    images = generate_toy_dataset(ToyDatasetSpec(count=24, size=32, shape_fraction=0.0, seed=3))
    worst = max(
        _max_constant_run(img[c, i]) for img in images for c in range(img.shape[0]) for i in range(32)
    )
    assert worst <= 8


def test_shape_images_do_contain_flat_runs():
    images = generate_toy_dataset(ToyDatasetSpec(count=24, size=32, shape_fraction=1.0, seed=3))
    worst = max(
        _max_constant_run(img[c, i]) for img in images for c in range(img.shape[0]) for i in range(32)
    )
    assert worst > 8


def test_spec_validation():
    with pytest.raises(ValueError):
        ToyDatasetSpec(count=0)
    with pytest.raises(ValueError):
        ToyDatasetSpec(count=1, shape_fraction=1.5)
