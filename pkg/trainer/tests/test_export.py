import json
import struct
import zlib
from pathlib import Path

import numpy as np
import pytest
import torch

from toy_prior_trainer import (
    TinyEps,
    arch_hash,
    export_weights,
    import_weights,
    tensor_layout,
    write_parity_vectors,
)

ARTIFACTS = Path(__file__).resolve().parents[1] / "artifacts"


@pytest.fixture
def model():
    torch.manual_seed(11)
    return TinyEps(feature_width=32, channels=3)


def _parse_container(path):
    data = path.read_bytes()
    assert data[:4] == b"TEPS"
    (version,) = struct.unpack_from("<I", data, 4)
    (hlen,) = struct.unpack_from("<Q", data, 8)
    header = json.loads(data[16 : 16 + hlen].decode())
    payload_len = max(e["offset"] + e["length"] for e in header["tensors"])
    payload = data[16 + hlen : 16 + hlen + payload_len]
    (crc,) = struct.unpack_from("<I", data, 16 + hlen + payload_len)
    return version, header, payload, crc


def test_crc_validates_after_write(tmp_path, model):
    path = tmp_path / "w.teps"
    export_weights(model, path)
    version, header, payload, crc = _parse_container(path)
    assert version == 1
    assert crc == zlib.crc32(payload)


def test_header_round_trips_through_stdlib_json(tmp_path, model):
    path = tmp_path / "w.teps"
    export_weights(model, path, provenance={"note": "test"})
    _, header, _, _ = _parse_container(path)
    assert header["architecture"] == "tiny-eps-v1"
    assert header["feature_width"] == 32 and header["channels"] == 3
    assert header["arch_hash"] == arch_hash(32, 3)
    assert header["provenance"] == {"note": "test"}
    names = [e["name"] for e in header["tensors"]]
    assert names == [name for name, _ in tensor_layout(32, 3)]
    for entry in header["tensors"]:
        assert entry["dtype"] == "f32"
        assert entry["length"] == 4 * int(np.prod(entry["shape"]))


def test_import_round_trip_is_exact(tmp_path, model):
    path = tmp_path / "w.teps"
    export_weights(model, path)
    again = import_weights(path)
    for (k1, v1), (k2, v2) in zip(model.state_dict().items(), again.state_dict().items()):
        assert k1 == k2
        assert torch.equal(v1, v2)


def test_parity_vectors_reproduce_own_forward(tmp_path, model):
    path = tmp_path / "parity.json"
    write_parity_vectors(model, path, count=8, size=8, seed=5)
    raw = json.loads(path.read_text())
    assert len(raw["inputs"]) == len(raw["t_values"]) == len(raw["outputs"]) == 8
    shape = tuple(raw["shape"])
    model.eval()
    with torch.no_grad():
        for flat_in, t, flat_out in zip(raw["inputs"], raw["t_values"], raw["outputs"]):
            x = torch.tensor(flat_in, dtype=torch.float32).reshape(1, *shape)
            out = model(x, torch.tensor([float(t)]))
            assert np.array_equal(out.numpy().ravel(), np.asarray(flat_out, dtype=np.float32))


def test_cross_implementation_parity_with_consumer(tmp_path, model):
    """The independent numpy consumer loads this writer's file and agrees on
    the forward pass within float32 tolerance (1e-5)."""
    vbdenoise = pytest.importorskip("vbdenoise")
    path = tmp_path / "w.teps"
    export_weights(model, path)
    predictor = vbdenoise.load_tiny_predictor(path)
    rng = np.random.default_rng(3)
    model.eval()
    for t in (1.0, 250.0, 1000.0):
        x = rng.standard_normal((10, 9, 3)).astype(np.float32)
        with torch.no_grad():
            ours = model(
                torch.from_numpy(x.transpose(2, 0, 1)[None]), torch.tensor([t])
            ).numpy()[0].transpose(1, 2, 0)
        theirs = predictor(x.astype(np.float64), t)
        assert np.abs(ours - theirs).max() < 1e-5

    from vbdenoise.weights_io import arch_hash as consumer_hash

    assert arch_hash(32, 3) == consumer_hash(32, 3)


def test_shipped_artifacts_if_present():
    weights = ARTIFACTS / "toy_weights.teps"
    parity = ARTIFACTS / "parity.json"
    if not (weights.exists() and parity.exists()):
        pytest.skip("artifacts not generated")
    version, header, payload, crc = _parse_container(weights)
    assert crc == zlib.crc32(payload)
    assert header["arch_hash"] == arch_hash(header["feature_width"], header["channels"])
    assert header["provenance"]["schedule"] == {"steps": 1000, "eta_start": 1e-4, "eta_end": 0.02}
    raw = json.loads(parity.read_text())
    assert len(raw["inputs"]) >= 8
