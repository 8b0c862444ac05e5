"""Deterministic random streams.

All stochastic operations draw from counter-based Philox generators keyed
by an explicit (seed, *path) tuple, so the set of draws is a pure function
of the seed and the logical position in the algorithm (e.g. the diffusion
step index), never of scheduling or thread count.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return an independent generator for the given seed and derivation path.

    Streams with different paths are statistically independent; the same
    (seed, path) always yields the identical draw sequence.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
