"""Forward pass of the small convolutional noise predictor.

Frozen architecture ("tiny-eps-v1"), float32 throughout:

  time embedding : dim 64, frequencies f_k = 10000^(-k/31) for k = 0..31,
                   embedding [sin(t f_k) || cos(t f_k)]
  time MLP       : dense 64 -> F, SiLU, dense F -> F
  stem           : 3x3 conv C -> F, zero padding, stride 1
  2 residual blocks, each:
                   u = SiLU(h); u = conv3x3(u); u += per-channel time bias
                   (a per-block dense F -> F projection of the time feature);
                   u = SiLU(u); u = conv3x3(u); h = h + u
  head           : SiLU then 3x3 conv F -> C

Everything is fully convolutional, so any spatial resolution works. Angles
for the embedding are computed in float64 and cast, so independent
implementations agree to float32 precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ARCHITECTURE = "tiny-eps-v1"
TIME_EMB_DIM = 64
DEFAULT_FEATURE_WIDTH = 32


def tensor_specs(feature_width: int, channels: int) -> list[tuple[str, tuple[int, ...]]]:
    """Canonical (name, shape) list defining the weights layout."""
    f, c = int(feature_width), int(channels)
    specs: list[tuple[str, tuple[int, ...]]] = [
        ("time_mlp.w1", (f, TIME_EMB_DIM)),
        ("time_mlp.b1", (f,)),
        ("time_mlp.w2", (f, f)),
        ("time_mlp.b2", (f,)),
        ("stem.w", (f, c, 3, 3)),
        ("stem.b", (f,)),
    ]
    for b in (1, 2):
        specs += [
            (f"block{b}.conv1.w", (f, f, 3, 3)),
            (f"block{b}.conv1.b", (f,)),
            (f"block{b}.time_proj.w", (f, f)),
            (f"block{b}.time_proj.b", (f,)),
            (f"block{b}.conv2.w", (f, f, 3, 3)),
            (f"block{b}.conv2.b", (f,)),
        ]
    specs += [("head.w", (c, f, 3, 3)), ("head.b", (c,))]
    return specs


def silu(x: np.ndarray) -> np.ndarray:
    # x / (1 + exp(-x)) with in-place ops; one allocation instead of three
    out = np.negative(x)
    np.exp(out, out=out)
    out += 1.0
    np.divide(x, out, out=out)
    return out


def time_embedding(t: np.ndarray | float, dim: int = TIME_EMB_DIM) -> np.ndarray:
    """Sinusoidal embedding of integer steps, shape (batch, dim), float32."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    half = dim // 2
    freqs = 10000.0 ** (-np.arange(half, dtype=np.float64) / (half - 1))
    angles = t[:, None] * freqs[None, :]
    emb = np.concatenate([np.sin(angles), np.cos(angles)], axis=1)
    return emb.astype(np.float32)


def _conv3x3_cf(x_cf: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross-correlation with 3x3 kernels, zero padding, stride 1.

    Channels-first-of-batch layout: x_cf is (Cin, B, H, W). The nine taps
    are gathered into an im2col matrix so the whole conv is one sgemm.
    """
    C, B, H, W = x_cf.shape
    O = w.shape[0]
    xp = np.pad(x_cf, ((0, 0), (0, 0), (1, 1), (1, 1)))
    cols = np.empty((9 * C, B * H * W), dtype=np.float32)
    cols4d = cols.reshape(9 * C, B, H, W)
    k = 0
    for di in range(3):
        for dj in range(3):
            # shaped destination view: one strided copy, no reshape temp
            cols4d[k * C : (k + 1) * C] = xp[:, :, di : di + H, dj : dj + W]
            k += 1
    # weight rows flattened in the same (di, dj, c) order as the cols blocks
    wmat = np.ascontiguousarray(w.transpose(0, 2, 3, 1).reshape(O, 9 * C))
    out = (wmat @ cols).reshape(O, B, H, W)
    out += b[:, None, None, None]
    return out


@dataclass(frozen=True)
class TinyPredictorWeights:
    feature_width: int
    channels: int
    tensors: dict[str, np.ndarray]

    def __post_init__(self):
        expected = dict(tensor_specs(self.feature_width, self.channels))
        names = set(self.tensors)
        if names != set(expected):
            missing = sorted(set(expected) - names)
            extra = sorted(names - set(expected))
            raise ValueError(f"tensor set mismatch: missing {missing}, extra {extra}")
        for name, shape in expected.items():
            arr = self.tensors[name]
            if arr.shape != shape:
                raise ValueError(f"tensor '{name}' has shape {arr.shape}, expected {shape}")
            if arr.dtype != np.float32:
                raise ValueError(f"tensor '{name}' has dtype {arr.dtype}, expected float32")


def forward(weights: TinyPredictorWeights, x: np.ndarray, t: np.ndarray | float) -> np.ndarray:
    """Predict noise for a float32 batch x of shape (B, C, H, W)."""
    w = weights.tensors
    emb = time_embedding(t)
    if emb.shape[0] == 1 and x.shape[0] > 1:
        emb = np.broadcast_to(emb, (x.shape[0], emb.shape[1]))
    tfeat = silu(emb @ w["time_mlp.w1"].T + w["time_mlp.b1"])
    tfeat = tfeat @ w["time_mlp.w2"].T + w["time_mlp.b2"]

    h = _conv3x3_cf(np.ascontiguousarray(x.transpose(1, 0, 2, 3)), w["stem.w"], w["stem.b"])
    for b in (1, 2):
        u = silu(h)
        u = _conv3x3_cf(u, w[f"block{b}.conv1.w"], w[f"block{b}.conv1.b"])
        tb = tfeat @ w[f"block{b}.time_proj.w"].T + w[f"block{b}.time_proj.b"]
        u = u + tb.T[:, :, None, None]
        u = silu(u)
        u = _conv3x3_cf(u, w[f"block{b}.conv2.w"], w[f"block{b}.conv2.b"])
        h = h + u
    out_cf = _conv3x3_cf(silu(h), w["head.w"], w["head.b"])
    return np.ascontiguousarray(out_cf.transpose(1, 0, 2, 3))


@dataclass(frozen=True)
class TinyConvEpsilon:
    """Noise predictor wrapping the tiny network; any resolution, fixed channels."""

    weights: TinyPredictorWeights
    required_hw: tuple[int, int] | None = None

    @property
    def channels(self) -> int:
        return self.weights.channels

    def __call__(self, x_t: np.ndarray, t: int) -> np.ndarray:
        if x_t.ndim != 3 or x_t.shape[2] != self.channels:
            raise ValueError(
                f"expected (H, W, {self.channels}) input, got shape {x_t.shape}"
            )
        batch = x_t.transpose(2, 0, 1)[None].astype(np.float32)
        out = forward(self.weights, batch, float(t))
        return out[0].transpose(1, 2, 0).astype(np.float64)


def random_tiny_weights(
    rng: np.random.Generator, feature_width: int = DEFAULT_FEATURE_WIDTH, channels: int = 3
) -> TinyPredictorWeights:
    """Random small-magnitude weights; handy for format and algebra tests."""
    tensors = {
        name: (0.1 * rng.standard_normal(shape)).astype(np.float32)
        for name, shape in tensor_specs(feature_width, channels)
    }
    return TinyPredictorWeights(feature_width, channels, tensors)
