"""Binary container for tiny-predictor weights.

Layout (all integers little-endian):

    magic   "TEPS" (4 bytes)
    version u32 (= 1)
    hlen    u64, byte length of the JSON header
    header  JSON: {"architecture", "feature_width", "channels", "arch_hash",
                   "tensors": [{"name", "shape", "dtype": "f32",
                                "offset", "length"}]}
            offset/length are bytes relative to the payload start
    payload contiguous little-endian float32 blobs
    crc     u32, CRC32 of the payload bytes

The architecture hash is a SHA-256 prefix over the canonical layout
descriptor, so producer and consumer fail loudly on any drift in the
frozen architecture.
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib

import numpy as np

from .errors import WeightsFormatError
from .tiny_net import ARCHITECTURE, TinyConvEpsilon, TinyPredictorWeights, tensor_specs

MAGIC = b"TEPS"
VERSION = 1


def arch_hash(feature_width: int, channels: int) -> str:
    """16-hex-digit digest of the canonical architecture descriptor."""
    parts = [f"{ARCHITECTURE}|F={int(feature_width)}|C={int(channels)}"]
    parts += [
        f"{name}:{'x'.join(str(d) for d in shape)}"
        for name, shape in tensor_specs(feature_width, channels)
    ]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


def write_tiny_weights(path, weights: TinyPredictorWeights) -> None:
    """Serialize weights in canonical tensor order."""
    specs = tensor_specs(weights.feature_width, weights.channels)
    blobs = []
    entries = []
    offset = 0
    for name, shape in specs:
        blob = np.ascontiguousarray(weights.tensors[name], dtype="<f4").tobytes()
        entries.append(
            {
                "name": name,
                "shape": list(shape),
                "dtype": "f32",
                "offset": offset,
                "length": len(blob),
            }
        )
        blobs.append(blob)
        offset += len(blob)
    payload = b"".join(blobs)
    header = json.dumps(
        {
            "architecture": ARCHITECTURE,
            "feature_width": weights.feature_width,
            "channels": weights.channels,
            "arch_hash": arch_hash(weights.feature_width, weights.channels),
            "tensors": entries,
        },
        sort_keys=True,
    ).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        f.write(payload)
        f.write(struct.pack("<I", zlib.crc32(payload)))


def read_tiny_weights(path) -> TinyPredictorWeights:
    """Parse and validate a TEPS container; every failure names its field."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 16:
        raise WeightsFormatError(f"file too short ({len(data)} bytes) for the fixed header")
    if data[:4] != MAGIC:
        raise WeightsFormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise WeightsFormatError(f"unsupported version {version}, expected {VERSION}")
    (hlen,) = struct.unpack_from("<Q", data, 8)
    header_end = 16 + hlen
    if header_end > len(data):
        raise WeightsFormatError(f"header length {hlen} exceeds file size {len(data)}")
    try:
        header = json.loads(data[16:header_end].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WeightsFormatError(f"header is not valid JSON: {exc}") from exc

    for key in ("architecture", "feature_width", "channels", "arch_hash", "tensors"):
        if key not in header:
            raise WeightsFormatError(f"header missing field '{key}'")
    if header["architecture"] != ARCHITECTURE:
        raise WeightsFormatError(
            f"architecture '{header['architecture']}', expected '{ARCHITECTURE}'"
        )
    fw, ch = int(header["feature_width"]), int(header["channels"])
    expected_hash = arch_hash(fw, ch)
    if header["arch_hash"] != expected_hash:
        raise WeightsFormatError(
            f"architecture hash '{header['arch_hash']}' does not match expected '{expected_hash}'"
        )

    expected = dict(tensor_specs(fw, ch))
    entries = {e["name"]: e for e in header["tensors"]}
    if set(entries) != set(expected):
        missing = sorted(set(expected) - set(entries))
        extra = sorted(set(entries) - set(expected))
        raise WeightsFormatError(f"tensor set mismatch: missing {missing}, extra {extra}")

    payload_len = max(e["offset"] + e["length"] for e in entries.values())
    payload_start = header_end
    if payload_start + payload_len + 4 > len(data):
        raise WeightsFormatError(
            f"payload length {payload_len} + checksum exceeds file size {len(data)}"
        )
    payload = data[payload_start : payload_start + payload_len]
    (crc_stored,) = struct.unpack_from("<I", data, payload_start + payload_len)
    crc_actual = zlib.crc32(payload)
    if crc_stored != crc_actual:
        raise WeightsFormatError(
            f"checksum mismatch: stored {crc_stored:#010x}, computed {crc_actual:#010x}"
        )

    tensors = {}
    for name, shape in expected.items():
        e = entries[name]
        if e.get("dtype") != "f32":
            raise WeightsFormatError(f"tensor '{name}' dtype '{e.get('dtype')}', expected 'f32'")
        if tuple(e["shape"]) != shape:
            raise WeightsFormatError(
                f"tensor '{name}' shape {tuple(e['shape'])}, expected {shape}"
            )
        n = int(np.prod(shape))
        if e["length"] != 4 * n:
            raise WeightsFormatError(
                f"tensor '{name}' length {e['length']} bytes, expected {4 * n}"
            )
        arr = np.frombuffer(payload, dtype="<f4", count=n, offset=e["offset"])
        tensors[name] = arr.reshape(shape).copy()
    return TinyPredictorWeights(feature_width=fw, channels=ch, tensors=tensors)


def load_tiny_predictor(path) -> TinyConvEpsilon:
    """Load a predictor whose forward pass is the frozen architecture."""
    return TinyConvEpsilon(weights=read_tiny_weights(path))


def load_parity_vectors(path) -> list[dict]:
    """Read the parity fixture: {"shape", "inputs", "t_values", "outputs"}
    with flattened row-major arrays."""
    with open(path) as f:
        raw = json.load(f)
    shape = tuple(raw["shape"])
    vectors = []
    for flat_in, t, flat_out in zip(raw["inputs"], raw["t_values"], raw["outputs"]):
        vectors.append(
            {
                "input": np.asarray(flat_in, dtype=np.float32).reshape(shape),
                "t": float(t),
                "output": np.asarray(flat_out, dtype=np.float32).reshape(shape),
            }
        )
    return vectors
