"""TEPS container writer and parity-vector recorder.

The wire format (shared contract with the consumer):

    magic "TEPS" | u32 version=1 | u64 header length | JSON header |
    contiguous little-endian float32 blobs | u32 CRC32 of the payload

Header: {"architecture", "feature_width", "channels", "arch_hash",
"tensors": [{"name", "shape", "dtype": "f32", "offset", "length"}]},
offsets in bytes relative to the payload start. The architecture hash is
the first 16 hex digits of SHA-256 over
"tiny-eps-v1|F=<F>|C=<C>|<name>:<d0>x<d1>...|..." in canonical tensor
order. This module implements the format independently of any consumer.
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib

import numpy as np
import torch

from .model import ARCHITECTURE, TIME_EMB_DIM, TinyEps

MAGIC = b"TEPS"
VERSION = 1


def tensor_layout(feature_width: int, channels: int) -> list[tuple[str, tuple[int, ...]]]:
    f, c = int(feature_width), int(channels)
    layout: list[tuple[str, tuple[int, ...]]] = [
        ("time_mlp.w1", (f, TIME_EMB_DIM)),
        ("time_mlp.b1", (f,)),
        ("time_mlp.w2", (f, f)),
        ("time_mlp.b2", (f,)),
        ("stem.w", (f, c, 3, 3)),
        ("stem.b", (f,)),
    ]
    for b in (1, 2):
        layout += [
            (f"block{b}.conv1.w", (f, f, 3, 3)),
            (f"block{b}.conv1.b", (f,)),
            (f"block{b}.time_proj.w", (f, f)),
            (f"block{b}.time_proj.b", (f,)),
            (f"block{b}.conv2.w", (f, f, 3, 3)),
            (f"block{b}.conv2.b", (f,)),
        ]
    layout += [("head.w", (c, f, 3, 3)), ("head.b", (c,))]
    return layout


def arch_hash(feature_width: int, channels: int) -> str:
    parts = [f"{ARCHITECTURE}|F={int(feature_width)}|C={int(channels)}"]
    parts += [
        f"{name}:{'x'.join(str(d) for d in shape)}"
        for name, shape in tensor_layout(feature_width, channels)
    ]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


def export_weights(model: TinyEps, path, provenance: dict | None = None) -> None:
    """Write the trained weights; provenance lands in the header verbatim."""
    tensors = model.export_tensors()
    layout = tensor_layout(model.feature_width, model.channels)
    entries, blobs, offset = [], [], 0
    for name, shape in layout:
        arr = tensors[name]
        if arr.shape != shape:
            raise ValueError(f"tensor '{name}' has shape {arr.shape}, expected {shape}")
        blob = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        entries.append(
            {"name": name, "shape": list(shape), "dtype": "f32", "offset": offset, "length": len(blob)}
        )
        blobs.append(blob)
        offset += len(blob)
    payload = b"".join(blobs)
    header = {
        "architecture": ARCHITECTURE,
        "feature_width": model.feature_width,
        "channels": model.channels,
        "arch_hash": arch_hash(model.feature_width, model.channels),
        "tensors": entries,
    }
    if provenance:
        header["provenance"] = provenance
    header_bytes = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<Q", len(header_bytes)))
        f.write(header_bytes)
        f.write(payload)
        f.write(struct.pack("<I", zlib.crc32(payload)))


def import_weights(path) -> TinyEps:
    """Read a container back into a torch model (trainer-side reader)."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise ValueError(f"bad magic {data[:4]!r}")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise ValueError(f"unsupported version {version}")
    (hlen,) = struct.unpack_from("<Q", data, 8)
    header = json.loads(data[16 : 16 + hlen].decode())
    payload_len = max(e["offset"] + e["length"] for e in header["tensors"])
    payload = data[16 + hlen : 16 + hlen + payload_len]
    (crc_stored,) = struct.unpack_from("<I", data, 16 + hlen + payload_len)
    if crc_stored != zlib.crc32(payload):
        raise ValueError("checksum mismatch")

    model = TinyEps(feature_width=header["feature_width"], channels=header["channels"])
    arrays = {
        e["name"]: np.frombuffer(
            payload, dtype="<f4", count=int(np.prod(e["shape"])), offset=e["offset"]
        ).reshape(e["shape"])
        for e in header["tensors"]
    }
    mapping = {
        "time_mlp.w1": "time_w1.weight",
        "time_mlp.b1": "time_w1.bias",
        "time_mlp.w2": "time_w2.weight",
        "time_mlp.b2": "time_w2.bias",
        "stem.w": "stem.weight",
        "stem.b": "stem.bias",
        "head.w": "head.weight",
        "head.b": "head.bias",
    }
    for b in (1, 2):
        mapping[f"block{b}.conv1.w"] = f"block{b}.conv1.weight"
        mapping[f"block{b}.conv1.b"] = f"block{b}.conv1.bias"
        mapping[f"block{b}.time_proj.w"] = f"block{b}.time_proj.weight"
        mapping[f"block{b}.time_proj.b"] = f"block{b}.time_proj.bias"
        mapping[f"block{b}.conv2.w"] = f"block{b}.conv2.weight"
        mapping[f"block{b}.conv2.b"] = f"block{b}.conv2.bias"
    state = {mapping[name]: torch.from_numpy(arr.copy()) for name, arr in arrays.items()}
    model.load_state_dict(state)
    return model


def write_parity_vectors(model: TinyEps, path, count: int = 8, size: int = 8, seed: int = 123) -> None:
    """Record (input, t, output) triples from this trainer's own forward pass
    so an independent implementation can be checked against them."""
    if count < 8:
        raise ValueError("at least 8 parity vectors are required")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    t_values = np.linspace(1, 1000, count).round().astype(int).tolist()
    inputs, outputs = [], []
    model.eval()
    with torch.no_grad():
        for t in t_values:
            x = rng.standard_normal((1, model.channels, size, size)).astype(np.float32)
            out = model(torch.from_numpy(x), torch.tensor([float(t)]))
            inputs.append([float(v) for v in x.ravel()])
            outputs.append([float(v) for v in out.numpy().ravel()])
    model.train()
    with open(path, "w") as f:
        json.dump(
            {
                "shape": [model.channels, size, size],
                "inputs": inputs,
                "t_values": [float(t) for t in t_values],
                "outputs": outputs,
            },
            f,
        )
