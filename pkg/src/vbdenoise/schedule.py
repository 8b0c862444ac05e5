"""Forward-process variance schedule and derived per-step constants.

The forward chain corrupts with per-step variances eta_1..eta_T; the
derived quantities are a_t = 1 - eta_t, the cumulative signal fraction
a_bar_t = prod_{s<=t} a_s, and the reverse-step variance sigma2_t
(posterior variance eta~_t = eta_t * (1 - a_bar_{t-1}) / (1 - a_bar_t),
with a_bar_0 := 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

DEFAULT_STEPS = 1000
DEFAULT_ETA_START = 1e-4
DEFAULT_ETA_END = 0.02

# eta~_1 is identically zero; it is floored so the blending weight
# sigma2 / (sigma2 + var) at the final step never becomes 0/0.
SIGMA2_FLOOR = 1e-12


@dataclass(frozen=True)
class DiffusionSchedule:
    """Precomputed schedule tables, index i holds the value for step t = i + 1."""

    T: int
    eta: np.ndarray
    a: np.ndarray
    a_bar: np.ndarray
    sigma2: np.ndarray

    def eta_at(self, t: int) -> float:
        """Per-step variance eta_t, t in [1, T]."""
        return float(self.eta[self._index(t)])

    def a_at(self, t: int) -> float:
        """Signal retention a_t = 1 - eta_t, t in [1, T]."""
        return float(self.a[self._index(t)])

    def a_bar_at(self, t: int) -> float:
        """Cumulative signal fraction a_bar_t, t in [0, T]; a_bar_0 = 1."""
        if t == 0:
            return 1.0
        return float(self.a_bar[self._index(t)])

    def sigma2_at(self, t: int) -> float:
        """Reverse-step variance sigma_t^2, t in [1, T]."""
        return float(self.sigma2[self._index(t)])

    def _index(self, t: int) -> int:
        if not 1 <= t <= self.T:
            raise ConfigurationError(f"step index t={t} outside [1, {self.T}]")
        return int(t) - 1


def build_schedule(
    T: int = DEFAULT_STEPS,
    eta_start: float = DEFAULT_ETA_START,
    eta_end: float = DEFAULT_ETA_END,
) -> DiffusionSchedule:
    """Build a linear variance schedule with T steps.

    eta is interpolated linearly from eta_start to eta_end inclusive
    (a single step uses eta_start alone).
    """
    if T < 1:
        raise ConfigurationError(f"step count T={T} must be >= 1")
    if not 0.0 < eta_start < 1.0:
        raise ConfigurationError(f"eta_start={eta_start} outside the open interval (0, 1)")
    if not 0.0 < eta_end < 1.0:
        raise ConfigurationError(f"eta_end={eta_end} outside the open interval (0, 1)")
    if eta_start > eta_end:
        raise ConfigurationError(f"eta_start={eta_start} exceeds eta_end={eta_end}")

    eta = np.linspace(eta_start, eta_end, T)
    a = 1.0 - eta
    a_bar = np.cumprod(a)

    # a_bar_{t-1} with a_bar_0 = 1, aligned to index t-1.
    a_bar_prev = np.concatenate(([1.0], a_bar[:-1]))
    sigma2 = eta * (1.0 - a_bar_prev) / (1.0 - a_bar)
    sigma2 = np.maximum(sigma2, SIGMA2_FLOOR)

    return DiffusionSchedule(T=int(T), eta=eta, a=a, a_bar=a_bar, sigma2=sigma2)
