import numpy as np
import pytest

from vbdenoise import (
    WeightsFormatError,
    load_tiny_predictor,
    random_tiny_weights,
    read_tiny_weights,
    write_tiny_weights,
)
from vbdenoise.rng import stream
from vbdenoise.tiny_net import TinyPredictorWeights, forward, tensor_specs, time_embedding
from vbdenoise.weights_io import arch_hash


@pytest.fixture
def weights():
    return random_tiny_weights(stream(3, 1), feature_width=32, channels=3)


def test_round_trip_preserves_every_tensor_bit_exactly(tmp_path, weights):
    path = tmp_path / "w.teps"
    write_tiny_weights(path, weights)
    loaded = read_tiny_weights(path)
    assert loaded.feature_width == 32 and loaded.channels == 3
    for name in weights.tensors:
        assert np.array_equal(weights.tensors[name], loaded.tensors[name])


def test_loaded_predictor_matches_direct_forward(tmp_path, weights):
    path = tmp_path / "w.teps"
    write_tiny_weights(path, weights)
    predictor = load_tiny_predictor(path)
    x = stream(4, 0).standard_normal((6, 7, 3))
    direct = forward(weights, x.transpose(2, 0, 1)[None].astype(np.float32), 500.0)
    np.testing.assert_array_equal(predictor(x, 500), direct[0].transpose(1, 2, 0).astype(np.float64))


def test_truncated_file_names_payload_length(tmp_path, weights):
    path = tmp_path / "w.teps"
    write_tiny_weights(path, weights)
    data = path.read_bytes()
    (tmp_path / "t.teps").write_bytes(data[: len(data) // 2])
    with pytest.raises(WeightsFormatError, match="payload length"):
        read_tiny_weights(tmp_path / "t.teps")


def test_bad_magic(tmp_path, weights):
    path = tmp_path / "w.teps"
    write_tiny_weights(path, weights)
    data = bytearray(path.read_bytes())
    data[:4] = b"NOPE"
    path.write_bytes(bytes(data))
    with pytest.raises(WeightsFormatError, match="magic"):
        read_tiny_weights(path)


def test_bad_version(tmp_path, weights):
    path = tmp_path / "w.teps"
    write_tiny_weights(path, weights)
    data = bytearray(path.read_bytes())
    data[4] = 9
    path.write_bytes(bytes(data))
    with pytest.raises(WeightsFormatError, match="version"):
        read_tiny_weights(path)


def test_corrupted_payload_fails_checksum(tmp_path, weights):
    path = tmp_path / "w.teps"
    write_tiny_weights(path, weights)
    data = bytearray(path.read_bytes())
    data[-100] ^= 0xFF
    path.write_bytes(bytes(data))
    with pytest.raises(WeightsFormatError, match="checksum"):
        read_tiny_weights(path)


def test_shape_mismatch_rejected():
    tensors = {name: np.zeros(shape, dtype=np.float32) for name, shape in tensor_specs(32, 3)}
    tensors["stem.w"] = np.zeros((32, 3, 5, 5), dtype=np.float32)
    with pytest.raises(ValueError, match="stem.w"):
        TinyPredictorWeights(32, 3, tensors)


def test_arch_hash_depends_on_layout():
    assert arch_hash(32, 3) != arch_hash(32, 1)
    assert arch_hash(32, 3) == arch_hash(32, 3)
    assert len(arch_hash(32, 3)) == 16


def test_time_embedding_layout():
    emb = time_embedding(0.0)
    assert emb.shape == (1, 64)
    # t = 0: all sines zero, all cosines one
    np.testing.assert_array_equal(emb[0, :32], np.zeros(32, dtype=np.float32))
    np.testing.assert_array_equal(emb[0, 32:], np.ones(32, dtype=np.float32))


def test_forward_is_translation_equivariant_in_the_interior(weights):
    """Fully-convolutional forward: shifting the input shifts the output
    outside the receptive field of the zero-padded boundary (six stacked
    3x3 convolutions give radius 6)."""
    rng = stream(6, 0)
    x = rng.standard_normal((1, 3, 24, 24)).astype(np.float32)
    out = forward(weights, x, 100.0)
    shift = 3
    out_shift = forward(weights, np.roll(x, shift, axis=3), 100.0)
    rolled = np.roll(out, shift, axis=3)
    clean = slice(6 + shift, 24 - 6)
    np.testing.assert_allclose(
        out_shift[:, :, 7:-7, clean], rolled[:, :, 7:-7, clean], atol=1e-6
    )


def test_batched_and_single_forward_agree(weights):
    rng = stream(6, 1)
    x = rng.standard_normal((3, 3, 8, 8)).astype(np.float32)
    full = forward(weights, x, np.array([10.0, 20.0, 30.0]))
    for i, t in enumerate([10.0, 20.0, 30.0]):
        single = forward(weights, x[i : i + 1], t)
        np.testing.assert_allclose(single[0], full[i], atol=2e-6)
