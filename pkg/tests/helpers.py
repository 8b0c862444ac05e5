"""Shared test utilities: independent oracles and synthetic scenes."""

import numpy as np
from scipy import ndimage

from vbdenoise.rng import stream


def smooth_scene(seed: int, height: int, width: int, channels: int = 1, scale: float = 0.35):
    """Band-limited random field in model range, |values| <= scale."""
    rng = stream(seed, 0xFACE)
    f = ndimage.gaussian_filter(rng.standard_normal((height, width, channels)), sigma=3.0, axes=(0, 1))
    f /= max(np.abs(f).max(), 1e-9)
    return scale * f


def _smooth(rng, height, width, channels=1, sigma=3.0, scale=0.35):
    f = ndimage.gaussian_filter(rng.standard_normal((height, width, channels)), sigma=sigma, axes=(0, 1))
    f /= max(np.abs(f).max(), 1e-9)
    return scale * f


def heteroscedastic_run(seed, enable_ale, gamma=0.2, T=200, n=24):
    """One heteroscedastic-noise restoration: spatially split noise levels
    (0.05 left, 0.4 right), informative-but-imperfect single-Gaussian prior,
    rate prior gauged to the average noise variance. Returns PSNR in dB."""
    from vbdenoise import (
        GaussianMixtureEpsilon,
        RestorationConfig,
        build_schedule,
        denoise,
        psnr,
        single_gaussian_prior,
    )

    rng = stream(4000, seed)
    m_field = _smooth(rng, n, n)
    c = 0.02
    x0 = m_field + np.sqrt(c) * rng.standard_normal((n, n, 1))
    sigma_map = np.where(np.arange(n)[None, :, None] < n // 2, 0.05, 0.4)
    y0 = x0 + sigma_map * rng.standard_normal(x0.shape)
    config = RestorationConfig(
        beta=float((sigma_map**2).mean()),
        kernel_scale=1.0,
        T=T,
        seed=seed,
        gamma=gamma,
        enable_ale=enable_ale,
        enable_rectify=False,
    )
    predictor = GaussianMixtureEpsilon(single_gaussian_prior(m_field, c), build_schedule(T))
    return psnr(x0, denoise(y0, predictor, config).image, peak=2.0)


def correlated_noise_run(seed, enable_rectify, T=200, n=24, sigma=0.25):
    """One spatially-correlated-noise restoration. Returns PSNR in dB."""
    from vbdenoise import (
        GaussianMixtureEpsilon,
        NoiseSpec,
        RestorationConfig,
        build_schedule,
        corrupt,
        denoise,
        psnr,
        single_gaussian_prior,
    )

    rng = stream(5000, seed)
    m_field = _smooth(rng, n, n)
    c = 0.02
    x0 = m_field + np.sqrt(c) * rng.standard_normal((n, n, 1))
    y0 = corrupt(x0, NoiseSpec.correlated(sigma, 9, 1.0), stream(5001, seed))
    config = RestorationConfig(
        beta=sigma**2, kernel_scale=1.0, T=T, seed=seed, enable_rectify=enable_rectify
    )
    predictor = GaussianMixtureEpsilon(single_gaussian_prior(m_field, c), build_schedule(T))
    return psnr(x0, denoise(y0, predictor, config).image, peak=2.0)


def scalar_fixed_point(y, mu, s2, alpha, beta, gamma, tol=1e-14, max_iters=100000):
    """High-precision scalar iteration of the two coordinate updates.

    Independent of the package implementation: plain Python floats,
    iterated until both the mean and the precision stabilize to tol.
    """
    E = 1.0
    mu_hat = mu
    for _ in range(max_iters):
        den = E * s2 + gamma
        new_mu = (s2 * E * y + gamma * mu) / den
        sig2 = gamma * s2 / den
        a_hat = alpha + 1.0 / (2.0 * gamma)
        b_hat = beta + ((y - new_mu) ** 2 + sig2) / (2.0 * gamma)
        E_new = a_hat / b_hat
        if abs(new_mu - mu_hat) < tol and abs(E_new - E) < tol * E:
            return {"mu_hat": new_mu, "sigma2_hat": sig2, "alpha_hat": a_hat, "beta_hat": b_hat}
        mu_hat, E = new_mu, E_new
    raise AssertionError("scalar fixed-point oracle did not converge")
