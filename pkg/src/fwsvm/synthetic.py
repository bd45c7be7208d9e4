"""Synthetic two-cluster Gaussian datasets for desk-scale benchmarks."""

from __future__ import annotations

import numpy as np

from .dataset import SparseDataset, SparseRow


def two_clusters(m: int, seed: int, d: int = 6, sep: float = 3.0, flip: float = 0.03) -> SparseDataset:
    """Two unit-variance Gaussian blobs at +-sep/2 per coordinate.

    A `flip` fraction of labels is inverted after placement so accuracy is
    not trivially 100%. Deterministic given the seed.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if d < 1:
        raise ValueError("d must be >= 1")
    if not 0.0 <= flip < 1.0:
        raise ValueError("flip must be in [0, 1)")
    rng = np.random.default_rng(seed)
    y = np.where(rng.random(m) < 0.5, 1, -1)
    centers = {1: np.full(d, +sep / 2.0), -1: np.full(d, -sep / 2.0)}
    pts = np.vstack([rng.normal(loc=centers[int(yi)], scale=1.0) for yi in y])
    noise = rng.random(m) < flip
    y = np.where(noise, -y, y)
    idx = np.arange(d, dtype=np.int64)
    rows = [SparseRow(idx, pts[i]) for i in range(m)]
    return SparseDataset(rows, y)
