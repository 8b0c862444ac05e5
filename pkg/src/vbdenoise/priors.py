"""Exactly solvable image priors and their noise predictors.

A Gaussian-mixture prior over clean images admits a closed-form posterior
mean E[x_0 | x_t] under the forward corruption x_t = sqrt(a_bar) x_0 +
sqrt(1 - a_bar) eps, and therefore an exact optimal noise predictor

    eps*(x_t, t) = (x_t - sqrt(a_bar_t) E[x_0 | x_t]) / sqrt(1 - a_bar_t).

These predictors make every downstream quantity verifiable without any
trained network.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .schedule import DiffusionSchedule

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    mean: float | np.ndarray  # scalar or image-shaped field
    variance: float  # isotropic per-pixel variance


@dataclass(frozen=True)
class GaussianMixturePrior:
    """Per-pixel Gaussian mixture: each pixel is drawn from sum_k w_k N(m_k, c_k)."""

    components: tuple[MixtureComponent, ...]

    def __post_init__(self):
        if not self.components:
            raise ConfigurationError("mixture prior needs at least one component")
        w = np.array([c.weight for c in self.components], dtype=float)
        if np.any(w < 0.0):
            raise ConfigurationError("mixture weights must be nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ConfigurationError(f"mixture weights sum to {w.sum()!r}, expected 1")
        for c in self.components:
            if not c.variance > 0.0:
                raise ConfigurationError(f"component variance {c.variance} must be > 0")

    def posterior_x0_mean(self, x_t: np.ndarray, a_bar_t: float) -> np.ndarray:
        """Exact per-pixel E[x_0 | x_t] under the forward process at a_bar_t."""
        sqrt_ab = np.sqrt(a_bar_t)
        log_resp = []
        cond_means = []
        for comp in self.components:
            m = np.asarray(comp.mean, dtype=float)
            # Marginal of x_t under this component: N(sqrt_ab * m, v)
            v = a_bar_t * comp.variance + (1.0 - a_bar_t)
            centered = x_t - sqrt_ab * m
            log_w = np.log(comp.weight) if comp.weight > 0.0 else -np.inf
            log_resp.append(log_w - 0.5 * np.log(2.0 * np.pi * v) - centered**2 / (2.0 * v))
            cond_means.append(m + (sqrt_ab * comp.variance / v) * centered)

        log_resp = np.stack(np.broadcast_arrays(*log_resp), axis=0)
        cond_means = np.stack(np.broadcast_arrays(*[np.broadcast_to(cm, x_t.shape) for cm in cond_means]), axis=0)

        # Max-subtraction keeps the normalizer >= 1; an underflowing pixel
        # degenerates gracefully to its nearest component in log space.
        log_resp -= log_resp.max(axis=0, keepdims=True)
        resp = np.exp(log_resp)
        resp /= resp.sum(axis=0, keepdims=True)
        return np.sum(resp * cond_means, axis=0)

    def epsilon(self, x_t: np.ndarray, a_bar_t: float) -> np.ndarray:
        """Exact optimal noise prediction at corruption level a_bar_t < 1."""
        x0_mean = self.posterior_x0_mean(x_t, a_bar_t)
        return (x_t - np.sqrt(a_bar_t) * x0_mean) / np.sqrt(1.0 - a_bar_t)


def single_gaussian_prior(mean: float | np.ndarray, variance: float) -> GaussianMixturePrior:
    return GaussianMixturePrior((MixtureComponent(1.0, mean, variance),))


@dataclass(frozen=True)
class GaussianMixtureEpsilon:
    """Noise predictor backed by the exact mixture posterior; any resolution."""

    prior: GaussianMixturePrior
    sched: DiffusionSchedule
    channels: int | None = None  # None: works for any channel count
    required_hw: tuple[int, int] | None = field(default=None, init=False)

    def __call__(self, x_t: np.ndarray, t: int) -> np.ndarray:
        return self.prior.epsilon(x_t, self.sched.a_bar_at(t))


@dataclass(frozen=True)
class ZeroEpsilon:
    """Predicts zero noise everywhere; useful for algebraic identities."""

    channels: int | None = None
    required_hw: tuple[int, int] | None = None

    def __call__(self, x_t: np.ndarray, t: int) -> np.ndarray:
        return np.zeros_like(x_t)
