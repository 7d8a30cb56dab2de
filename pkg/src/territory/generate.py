"""Synthetic clustered instances standing in for real basic-area data."""
from __future__ import annotations

import numpy as np

from .core import Instance

SQUARE = 100.0


def generate_instance(n: int, k: int, seed: int = 0, clusters: int = 8, spread: float = 6.0,
                      epsilon: float = 0.05) -> Instance:
    """Gaussian clusters in a square; activities log-uniform in [1, 100]; Euclidean travel."""
    if k < 2 or n < k:
        raise ValueError(f"need n >= k >= 2, got n={n}, k={k}")
    if clusters < 1 or spread <= 0:
        raise ValueError("clusters must be >= 1 and spread > 0")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.0, SQUARE, size=(clusters, 2))
    which = rng.integers(clusters, size=n)
    xy = centers[which] + rng.normal(0.0, spread, size=(n, 2))
    activity = np.clip(np.exp(rng.uniform(0.0, np.log(100.0), size=n)), 1.0, 100.0)
    return Instance.from_arrays(xy[:, 0], xy[:, 1], activity, k, epsilon)
