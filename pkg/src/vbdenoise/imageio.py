"""8-bit PNG codec and range mapping.

Pixel value v in {0..255} maps to model range via v/255 -> 2v - 1; saving
inverts with round-half-up and clamping, so load/save round-trips any
8-bit image bit-exactly.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import CodecError


def load_image(path) -> np.ndarray:
    """Read an 8-bit grayscale or RGB PNG as an (H, W, C) array in [-1, 1]."""
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise CodecError(f"cannot decode '{path}': {exc}") from exc

    if img.mode in ("I", "I;16", "I;16B", "I;16L"):
        raise CodecError("unsupported bit depth 16")
    if img.mode == "L":
        arr = np.asarray(img, dtype=np.uint8)[:, :, None]
    elif img.mode == "RGB":
        arr = np.asarray(img, dtype=np.uint8)
    else:
        raise CodecError(f"unsupported color type '{img.mode}' (need 8-bit L or RGB)")
    return 2.0 * (arr.astype(float) / 255.0) - 1.0


def save_image(field: np.ndarray, path) -> None:
    """Write an (H, W, 1|3) model-range array as an 8-bit PNG."""
    field = np.asarray(field, dtype=float)
    if field.ndim == 2:
        field = field[:, :, None]
    if field.ndim != 3 or field.shape[2] not in (1, 3):
        raise CodecError(f"cannot encode array of shape {field.shape} (need HxWx1 or HxWx3)")
    unit = (np.clip(field, -1.0, 1.0) + 1.0) / 2.0
    u8 = np.clip(np.floor(unit * 255.0 + 0.5), 0, 255).astype(np.uint8)
    if u8.shape[2] == 1:
        Image.fromarray(u8[:, :, 0], mode="L").save(path, format="PNG")
    else:
        Image.fromarray(u8, mode="RGB").save(path, format="PNG")


def to_unit(x: np.ndarray) -> np.ndarray:
    """Model range [-1, 1] -> intensity range [0, 1]."""
    return (x + 1.0) / 2.0


def from_unit(u: np.ndarray) -> np.ndarray:
    """Intensity range [0, 1] -> model range [-1, 1]."""
    return 2.0 * u - 1.0
