"""Reverse-process mean computation and unconditional ancestral sampling."""

from __future__ import annotations

import numpy as np

from .errors import UnsupportedResolutionError, VbdenoiseError
from .rng import stream
from .schedule import DiffusionSchedule

# rng derivation path tags shared by sampling and restoration
PATH_INIT = 0
PATH_STEP_NOISE = 1
PATH_RECORRUPT = 2


class PredictorError(VbdenoiseError):
    """Noise predictor raised during a reverse step."""


def mu_theta(predictor, sched: DiffusionSchedule, x_t: np.ndarray, t: int) -> np.ndarray:
    """Posterior mean of the reverse transition at step t.

    mu = (x_t - eta_t / sqrt(1 - a_bar_t) * eps(x_t, t)) / sqrt(a_t)
    """
    eta_t = sched.eta_at(t)
    a_t = sched.a_at(t)
    a_bar_t = sched.a_bar_at(t)
    try:
        eps = predictor(x_t, t)
    except Exception as exc:
        raise PredictorError(f"epsilon predictor failed at step t={t}: {exc}") from exc
    return (x_t - (eta_t / np.sqrt(1.0 - a_bar_t)) * eps) / np.sqrt(a_t)


def predict_x0_from_eps(sched: DiffusionSchedule, x_t: np.ndarray, t: int, eps: np.ndarray) -> np.ndarray:
    """Invert the closed-form corruption: x0 = (x_t - sqrt(1-a_bar) eps) / sqrt(a_bar)."""
    a_bar_t = sched.a_bar_at(t)
    return (x_t - np.sqrt(1.0 - a_bar_t) * eps) / np.sqrt(a_bar_t)


def check_resolution(predictor, height: int, width: int) -> None:
    required = getattr(predictor, "required_hw", None)
    if required is not None and tuple(required) != (height, width):
        raise UnsupportedResolutionError(
            f"predictor requires {required[0]}x{required[1]} input, got {height}x{width}"
        )


def sample_unconditional(
    predictor,
    sched: DiffusionSchedule,
    height: int,
    width: int,
    channels: int,
    seed: int,
) -> np.ndarray:
    """Plain ancestral sampling x_T ~ N(0, I), x_{t-1} = mu + sigma_t z.

    No noise is added at the final step. All draws come from streams keyed
    by (seed, path, t), so the output is a pure function of the seed.
    """
    check_resolution(predictor, height, width)
    x = stream(seed, PATH_INIT).standard_normal((height, width, channels))
    for t in range(sched.T, 0, -1):
        mu = mu_theta(predictor, sched, x, t)
        if t > 1:
            z = stream(seed, PATH_STEP_NOISE, t).standard_normal(x.shape)
            x = mu + np.sqrt(sched.sigma2_at(t)) * z
        else:
            x = mu
    return x
