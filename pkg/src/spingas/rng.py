"""Reproducible random streams.

Every stream is a Philox (counter-based) generator keyed by the global seed
and a purpose tag, so results never depend on which worker ran what.
"""

from __future__ import annotations

import numpy as np

_TRAJECTORY = 0
_SETUP = 1


def _generator(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Classical-motion stream for trajectory ``index``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and trajectory index must be non-negative")
    return _generator(seed, _TRAJECTORY, index)


def setup_rng(seed: int, tag: int = 0) -> np.random.Generator:
    """Stream for quantities shared by all trajectories (initial configurations)."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return _generator(seed, _SETUP, tag)
