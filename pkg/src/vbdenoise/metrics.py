"""PSNR and SSIM image quality metrics."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError

PSNR_CAP_DB = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def psnr(ref: np.ndarray, test: np.ndarray, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE), capped at 99 dB (the MSE = 0 sentinel)."""
    ref = np.asarray(ref, dtype=float)
    test = np.asarray(test, dtype=float)
    if ref.shape != test.shape:
        raise ConfigurationError(f"shape mismatch: {ref.shape} vs {test.shape}")
    if not peak > 0.0:
        raise ConfigurationError(f"peak={peak} must be > 0")
    mse = float(np.mean((ref - test) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(peak**2 / mse), PSNR_CAP_DB)


def _ssim_plane(x: np.ndarray, y: np.ndarray, dynamic_range: float) -> float:
    H, W = x.shape
    if H < SSIM_WINDOW or W < SSIM_WINDOW:
        raise ConfigurationError(
            f"image {H}x{W} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    r = SSIM_WINDOW // 2
    i = np.arange(-r, r + 1, dtype=float)
    w = np.exp(-(i[:, None] ** 2 + i[None, :] ** 2) / (2.0 * SSIM_SIGMA**2))
    w /= w.sum()

    def local_mean(a):
        return ndimage.correlate(a, w, mode="constant")[r : H - r, r : W - r]

    mu_x = local_mean(x)
    mu_y = local_mean(y)
    var_x = local_mean(x * x) - mu_x**2
    var_y = local_mean(y * y) - mu_y**2
    cov = local_mean(x * y) - mu_x * mu_y

    c1 = (0.01 * dynamic_range) ** 2
    c2 = (0.03 * dynamic_range) ** 2
    s = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
        (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    )
    return float(s.mean())


def ssim(ref: np.ndarray, test: np.ndarray, dynamic_range: float = 2.0) -> float:
    """Mean local SSIM, 11x11 Gaussian window (sigma 1.5), valid positions
    only; C1 = (0.01 L)^2, C2 = (0.03 L)^2 with L the dynamic range
    (defaults to 2, the model range [-1, 1]). Multichannel images are
    scored per channel and averaged.
    """
    ref = np.asarray(ref, dtype=float)
    test = np.asarray(test, dtype=float)
    if ref.shape != test.shape:
        raise ConfigurationError(f"shape mismatch: {ref.shape} vs {test.shape}")
    if ref.ndim == 2:
        return _ssim_plane(ref, test, dynamic_range)
    if ref.ndim == 3:
        return float(
            np.mean([_ssim_plane(ref[:, :, c], test[:, :, c], dynamic_range) for c in range(ref.shape[2])])
        )
    raise ConfigurationError(f"expected 2-D or 3-D image, got shape {ref.shape}")
