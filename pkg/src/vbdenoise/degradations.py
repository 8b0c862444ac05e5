"""Synthetic degradation generators and the RGGB mosaic mask.

Gaussian kinds operate in model range [-1, 1]; count noise (Poisson,
Bernoulli) requires intensities in [0, 1] - callers convert around the
restoration step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError, DomainError
from .restore import gaussian_kernel

KINDS = ("gaussian", "gaussian_hetero", "correlated", "poisson", "bernoulli")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    sigma: float | None = None
    sigma_map: np.ndarray | None = None
    lam: float | None = None
    p: float | None = None
    kernel_size: int = 9
    kernel_scale: float = 1.0
    # "drop": a pixel is zeroed with probability p (default; p=0.2 removes
    # 20% of pixels). "keep" retains a pixel with probability p instead.
    bernoulli_mode: str = "drop"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown noise kind '{self.kind}'")
        if self.kind in ("gaussian", "correlated") and not (self.sigma is not None and self.sigma >= 0):
            raise ConfigurationError("gaussian noise needs sigma >= 0")
        if self.kind == "gaussian_hetero" and self.sigma_map is None:
            raise ConfigurationError("heteroscedastic noise needs a sigma_map")
        if self.kind == "poisson" and not (self.lam is not None and self.lam > 0):
            raise ConfigurationError("poisson noise needs lam > 0")
        if self.kind == "bernoulli":
            if not (self.p is not None and 0.0 < self.p < 1.0):
                raise ConfigurationError("bernoulli noise needs 0 < p < 1")
            if self.bernoulli_mode not in ("drop", "keep"):
                raise ConfigurationError(f"unknown bernoulli mode '{self.bernoulli_mode}'")

    @staticmethod
    def gaussian(sigma: float) -> "NoiseSpec":
        return NoiseSpec(kind="gaussian", sigma=sigma)

    @staticmethod
    def hetero(sigma_map: np.ndarray) -> "NoiseSpec":
        return NoiseSpec(kind="gaussian_hetero", sigma_map=sigma_map)

    @staticmethod
    def correlated(sigma: float, kernel_size: int = 9, kernel_scale: float = 1.0) -> "NoiseSpec":
        return NoiseSpec(kind="correlated", sigma=sigma, kernel_size=kernel_size, kernel_scale=kernel_scale)

    @staticmethod
    def poisson(lam: float) -> "NoiseSpec":
        return NoiseSpec(kind="poisson", lam=lam)

    @staticmethod
    def bernoulli(p: float, mode: str = "drop") -> "NoiseSpec":
        return NoiseSpec(kind="bernoulli", p=p, bernoulli_mode=mode)


def parse_noise_spec(text: str) -> NoiseSpec:
    """Parse the CLI grammar: poisson:30 | bernoulli:0.2 | gaussian:0.1 |
    correlated:0.1,9,1.0"""
    kind, _, args = text.partition(":")
    try:
        if kind == "poisson":
            return NoiseSpec.poisson(float(args))
        if kind == "bernoulli":
            return NoiseSpec.bernoulli(float(args))
        if kind == "gaussian":
            return NoiseSpec.gaussian(float(args))
        if kind == "correlated":
            sigma, size, scale = args.split(",")
            return NoiseSpec.correlated(float(sigma), int(size), float(scale))
    except (ValueError, ConfigurationError) as exc:
        raise ConfigurationError(f"bad noise spec '{text}': {exc}") from exc
    raise ConfigurationError(f"unknown noise kind in spec '{text}'")


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def corrupt(x0: np.ndarray, spec: NoiseSpec, rng) -> np.ndarray:
    """Apply the degradation; deterministic given the rng state/seed."""
    rng = _as_generator(rng)
    x0 = np.asarray(x0, dtype=float)

    if spec.kind == "gaussian":
        return x0 + spec.sigma * rng.standard_normal(x0.shape)

    if spec.kind == "gaussian_hetero":
        sigma_map = np.broadcast_to(np.asarray(spec.sigma_map, dtype=float), x0.shape)
        return x0 + sigma_map * rng.standard_normal(x0.shape)

    if spec.kind == "correlated":
        kernel = gaussian_kernel(spec.kernel_size, spec.kernel_scale)
        white = rng.standard_normal(x0.shape)
        noise = np.empty_like(white)
        if x0.ndim == 2:
            noise = ndimage.convolve(white, kernel, mode="wrap")
        else:
            for c in range(x0.shape[2]):
                noise[:, :, c] = ndimage.convolve(white[:, :, c], kernel, mode="wrap")
        # filtered white noise has variance sum(k^2); renormalize to unit
        # variance before scaling
        noise /= np.sqrt(np.sum(kernel**2))
        return x0 + spec.sigma * noise

    if spec.kind == "poisson":
        _require_unit_range(x0, "poisson")
        return rng.poisson(spec.lam * x0).astype(float) / spec.lam

    if spec.kind == "bernoulli":
        _require_unit_range(x0, "bernoulli")
        u = rng.random(x0.shape)
        keep = u >= spec.p if spec.bernoulli_mode == "drop" else u < spec.p
        return x0 * keep

    raise ConfigurationError(f"unknown noise kind '{spec.kind}'")


def _require_unit_range(x0: np.ndarray, kind: str) -> None:
    if x0.min() < 0.0 or x0.max() > 1.0:
        raise DomainError(
            f"{kind} noise needs intensities in [0, 1], got range "
            f"[{x0.min():.4g}, {x0.max():.4g}]"
        )


def rggb_mask(height: int, width: int) -> np.ndarray:
    """Binary (H, W, 3) mask of the RGGB color filter array.

    R is observed at (even, even), G at (even, odd) and (odd, even), B at
    (odd, odd); exactly one channel is observed per spatial site.
    """
    if height % 2 or width % 2:
        raise ConfigurationError(f"RGGB mask needs even dimensions, got {height}x{width}")
    mask = np.zeros((height, width, 3))
    mask[0::2, 0::2, 0] = 1.0
    mask[0::2, 1::2, 1] = 1.0
    mask[1::2, 0::2, 1] = 1.0
    mask[1::2, 1::2, 2] = 1.0
    return mask


def nearest_observed_fill(y0: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Baseline: fill every missing pixel with its nearest observed value
    (per channel, Euclidean distance)."""
    out = np.empty_like(y0)
    for c in range(y0.shape[2]):
        missing = mask[:, :, c] == 0.0
        _, (ii, jj) = ndimage.distance_transform_edt(missing, return_indices=True)
        out[:, :, c] = y0[ii, jj, c]
    return out
