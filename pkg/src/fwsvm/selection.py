"""Working-set policies for the vertex argmin, plus the sampling-bound tools.

The linear subproblem over the simplex reduces to the argmin of gradient
components. ``full`` scans every component of the maintained gradient;
``random`` draws a uniform sample without replacement each iteration and
evaluates gradient components only inside the sample. Ties break to the
smallest index in both policies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernel import KernelMatrix
from .problem import IterateState

KIND_FULL = "full"
KIND_RANDOM = "random"
_RESERVED_KINDS = ("adaptive",)


@dataclass(frozen=True)
class SelectionStrategy:
    """Working-set policy: full scan, or per-iteration uniform sample.

    seed, when set, drives the sampling stream directly; when None the
    solver derives one from the run seed.
    """

    kind: str = KIND_FULL
    sample_size: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind in _RESERVED_KINDS:
            raise ValueError(
                f"strategy kind {self.kind!r} is reserved for a future adaptive "
                "policy and is not implemented; use 'full' or 'random'"
            )
        if self.kind not in (KIND_FULL, KIND_RANDOM):
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind == KIND_RANDOM and self.sample_size < 1:
            raise ValueError("random strategy requires sample_size >= 1")


def select_full(state: IterateState) -> tuple[int, float]:
    """Smallest-index argmin over all maintained gradient components."""
    if state.grad is None:
        raise ValueError("full selection requires a maintained gradient")
    i = int(np.argmin(state.grad))
    return i, float(state.grad[i])


def select_sampled(
    state: IterateState,
    ka: KernelMatrix,
    strategy: SelectionStrategy,
    rng: np.random.Generator,
    panel=None,
) -> tuple[int, float, np.ndarray]:
    """Smallest-index argmin over a fresh uniform sample S.

    Gradient components are evaluated for sampled indices only, from the
    support columns; the remaining m - |S| components are never touched.
    Returns (index, gradient value there, sorted sample).
    """
    if strategy.kind != KIND_RANDOM:
        raise ValueError("select_sampled requires a random-kind strategy")
    m = state.m
    if strategy.sample_size > m:
        raise ValueError(f"sample_size {strategy.sample_size} exceeds m={m}")
    sample = np.sort(rng.choice(m, size=strategy.sample_size, replace=False))
    if panel is not None:
        vals = panel.values(sample, state.alpha)
    else:
        supp = np.sort(state.support)
        vals = ka.block(sample, supp) @ state.alpha[supp]
    j = int(np.argmin(vals))
    return int(sample[j]), float(vals[j]), sample


def sampling_bound(m: int, m_tilde: int, r: int) -> float:
    """Lower bound 1 - (m_tilde/m)^r on the probability that the minimum of
    a size-r random subset is at most m_tilde elements of the full set."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0 <= m_tilde <= m:
        raise ValueError("m_tilde must be in [0, m]")
    if r < 1:
        raise ValueError("r must be >= 1")
    return 1.0 - (m_tilde / m) ** r


def sampling_montecarlo(m: int, m_tilde: int, r: int, trials: int, seed: int) -> float:
    """Empirical counterpart of sampling_bound.

    Draws a random m-element value set, then `trials` independent size-r
    subsets (uniform, without replacement); returns the fraction of trials
    whose subset minimum ranks among the smallest m - m_tilde values.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0 <= m_tilde <= m:
        raise ValueError("m_tilde must be in [0, m]")
    if not 1 <= r <= m:
        raise ValueError("r must be in [1, m]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    values = rng.random(m)
    rank = np.empty(m, dtype=np.int64)
    rank[np.argsort(values)] = np.arange(m)
    cutoff = m - m_tilde
    hits = 0
    # Index sets of the r smallest of m iid uniforms are uniform r-subsets;
    # batched to bound memory.
    batch = max(1, 20_000_000 // m)
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        u = rng.random((n, m))
        sel = np.argpartition(u, r - 1, axis=1)[:, :r]
        hits += int((rank[sel] < cutoff).any(axis=1).sum())
        done += n
    return hits / trials
