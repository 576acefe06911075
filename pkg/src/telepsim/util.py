"""Small shared statistics and seeding helpers."""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def cell_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent deterministic stream for a grid cell: same master seed
    and key always reproduce the same draws, regardless of cell order."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)
