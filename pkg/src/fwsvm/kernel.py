"""Gaussian kernel, effective L2-SVM matrix assembly, and LRU row caching.

The trained problem is min over the unit simplex of (1/2) a^T K a with

    K_ij = y_i y_j (exp(-gamma ||x_i - x_j||^2) + 1) + delta_ij / C

(the +1 folds the bias in, the diagonal 1/C carries the slack penalty); a
``raw-gaussian`` mode exposes plain exp(-gamma ||x_i - x_j||^2) for unit
tests against hand-computable matrices.

Every matrix entry is produced by one canonical code path (a CSR product
against the densified query rows, accumulated in the target row's storage
order), so row lookups, block lookups, and cached reads of the same entry
are bitwise identical. That exactness is what makes cache-capacity choices
and full-versus-sampled comparisons reproducible down to the last bit.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import SparseDataset, SparseRow

MODE_EFFECTIVE = "l2svm-effective"
MODE_RAW = "raw-gaussian"


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian width, L2-SVM regularization, and assembly mode."""

    gamma: float
    c: float = 1.0
    mode: str = MODE_EFFECTIVE

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not self.c > 0:
            raise ValueError("C must be > 0")
        if self.mode not in (MODE_EFFECTIVE, MODE_RAW):
            raise ValueError(f"unknown kernel mode {self.mode!r}")


def gamma_from_dim(ds: SparseDataset) -> float:
    """Convenience heuristic gamma = 1/dim; only applied on explicit request."""
    return 1.0 / max(ds.dim, 1)


def _sq_norm(row: SparseRow) -> float:
    return float(np.dot(row.values, row.values))


def gaussian(x: SparseRow, z: SparseRow, gamma: float) -> float:
    """exp(-gamma ||x-z||^2), evaluated symmetrically in x and z."""
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    _, ix, iz = np.intersect1d(x.indices, z.indices, assume_unique=True, return_indices=True)
    d = float(np.dot(x.values[ix], z.values[iz]))
    dsq = (_sq_norm(x) - d) + (_sq_norm(z) - d)
    return float(np.exp(-gamma * max(dsq, 0.0)))


class KernelCache:
    """LRU map from row index to a dense kernel row.

    capacity: maximum number of cached rows; 0 disables storage, None is
    unbounded. Recency is updated on every access (get and put). Counters
    satisfy hits + misses == total get calls.
    """

    def __init__(self, capacity: Optional[int] = 1024):
        if capacity is not None and capacity < 0:
            raise ValueError("capacity must be >= 0 or None")
        self.capacity = capacity
        self._store: "OrderedDict[int, np.ndarray]" = OrderedDict()
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def __len__(self) -> int:
        return len(self._store)

    def get(self, i: int) -> Optional[np.ndarray]:
        row = self._store.get(i)
        if row is None:
            self.misses += 1
            return None
        self.hits += 1
        self._store.move_to_end(i)
        return row

    def put(self, i: int, row: np.ndarray) -> None:
        if self.capacity == 0:
            return
        self._store[i] = row
        self._store.move_to_end(i)
        if self.capacity is not None:
            while len(self._store) > self.capacity:
                self._store.popitem(last=False)
                self.evictions += 1


class KernelMatrix:
    """Implicit effective matrix over a dataset, with a row-level LRU cache.

    row(i) serves whole rows through the cache; block(rows, cols) computes
    an arbitrary sub-block fresh (no cache interaction) in O(|rows|*|cols|)
    kernel evaluations. Both paths produce bitwise-identical entries.
    """

    def __init__(
        self,
        ds: SparseDataset,
        spec: KernelSpec,
        cache_rows: Optional[int] = 1024,
        cache_bytes: Optional[int] = None,
    ):
        self.ds = ds
        self.spec = spec
        self.m = ds.m
        self.X = ds.to_csr()
        # Row squared norms accumulated in storage order, matching the
        # CSR product below so that dsq(i, i) is exactly zero.
        self.sq = np.asarray(self.X.multiply(self.X).sum(axis=1)).ravel()
        self.y = ds.labels.astype(np.float64)
        if spec.mode == MODE_EFFECTIVE:
            self.diag_value = 2.0 + 1.0 / spec.c
        else:
            self.diag_value = 1.0
        if cache_bytes is not None:
            cache_rows = max(0, int(cache_bytes // (8 * max(self.m, 1))))
        self.cache = KernelCache(cache_rows)

    # -- canonical assembly -------------------------------------------------

    def _assemble(self, dots: np.ndarray, targets, queries) -> np.ndarray:
        """(targets, queries) entries from target-major dot products."""
        sq_t = self.sq[targets]
        sq_q = self.sq[queries]
        dsq = np.maximum(sq_t[:, None] + (sq_q[None, :] - 2.0 * dots), 0.0)
        g = np.exp(-self.spec.gamma * dsq)
        if self.spec.mode == MODE_RAW:
            return g
        return (self.y[queries][None, :] * self.y[targets][:, None]) * (g + 1.0)

    def row(self, i: int) -> np.ndarray:
        """Full i-th row of K (read-only), via the LRU cache."""
        if not 0 <= i < self.m:
            raise IndexError(f"row index {i} out of range [0, {self.m})")
        cached = self.cache.get(i)
        if cached is not None:
            return cached
        xq = np.asarray(self.X[i].todense()).ravel()
        dots = self.X @ xq
        dsq = np.maximum(self.sq + (self.sq[i] - 2.0 * dots), 0.0)
        g = np.exp(-self.spec.gamma * dsq)
        if self.spec.mode == MODE_RAW:
            e = g
        else:
            e = (self.y[i] * self.y) * (g + 1.0)
            e[i] += 1.0 / self.spec.c
        e.flags.writeable = False
        self.cache.put(i, e)
        return e

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Fresh (len(rows), len(cols)) sub-block; bypasses the cache."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size and not (0 <= rows.min() and rows.max() < self.m):
            raise IndexError("row index out of range")
        if cols.size and not (0 <= cols.min() and cols.max() < self.m):
            raise IndexError("column index out of range")
        qd = np.asarray(self.X[rows].todense()).T
        dots = self.X[cols] @ qd
        e = self._assemble(dots, cols, rows)
        if self.spec.mode == MODE_EFFECTIVE:
            crossing = cols[:, None] == rows[None, :]
            if crossing.any():
                e[crossing] += 1.0 / self.spec.c
        return e.T

    def entry(self, i: int, j: int) -> float:
        return float(self.block([i], [j])[0, 0])

    def dense(self) -> np.ndarray:
        """Materialize K in full; intended for small-instance checks."""
        idx = np.arange(self.m)
        return self.block(idx, idx)

    # -- cache statistics ---------------------------------------------------

    @property
    def cache_hits(self) -> int:
        return self.cache.hits

    @property
    def cache_misses(self) -> int:
        return self.cache.misses

    @property
    def cache_evictions(self) -> int:
        return self.cache.evictions


def effective_entry(ds: SparseDataset, spec: KernelSpec, i: int, j: int) -> float:
    """Single entry K_ij through the same canonical path as row/block."""
    return KernelMatrix(ds, spec, cache_rows=0).entry(i, j)
