"""Training loop: selection, stepping, stopping, and run instrumentation.

Two execution modes share one step implementation. Full mode maintains the
dense gradient and stops on the exact duality gap; random mode samples a
working set each iteration, stops on the approximate gap, and keeps a
column panel with K[:, v] for every support vertex v so sampled gradient
components cost no fresh kernel evaluations. Equal seeds give equal
trajectories; random mode with |S| = m retraces full mode step for step.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Optional, Union

import numpy as np

from .dataset import SparseDataset
from .kernel import KernelMatrix, KernelSpec
from .model import SvmModel
from .problem import IterateState, StepRecord, approx_gap, fw_step, init_state, resync
from .selection import KIND_RANDOM, SelectionStrategy, select_full, select_sampled

TERMINATION_GAP = "gap-converged"
TERMINATION_ITERS = "max-iters"


class SupportPanel:
    """Kernel columns K[:, v] for the support vertices, in insertion order.

    Sampled gradient components are a row gather plus one matrix-vector
    product against this panel; columns are appended once per new support
    vertex from rows served through the kernel cache.
    """

    def __init__(self, m: int, init_capacity: int = 256):
        self.m = m
        cap = min(m, init_capacity)
        self._buf = np.empty((m, cap))
        self._verts = np.empty(cap, dtype=np.int64)
        self._n = 0

    @property
    def ncols(self) -> int:
        return self._n

    def _grow(self) -> None:
        cap = min(self.m, max(2 * self._buf.shape[1], 1))
        buf = np.empty((self.m, cap))
        buf[:, : self._n] = self._buf[:, : self._n]
        verts = np.empty(cap, dtype=np.int64)
        verts[: self._n] = self._verts[: self._n]
        self._buf, self._verts = buf, verts

    def append(self, vertex: int, column: np.ndarray) -> None:
        if self._n == self._buf.shape[1]:
            self._grow()
        self._buf[:, self._n] = column
        self._verts[self._n] = vertex
        self._n += 1

    def reset(self, vertex: int, column: np.ndarray) -> None:
        self._n = 0
        self.append(vertex, column)

    def values(self, indices: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        """Gradient components at the given indices."""
        apack = alpha[self._verts[: self._n]]
        return self._buf[indices, : self._n] @ apack

    def full_values(self, alpha: np.ndarray) -> np.ndarray:
        """All m gradient components (exact-gap diagnostics)."""
        apack = alpha[self._verts[: self._n]]
        return self._buf[:, : self._n] @ apack


@dataclass(frozen=True)
class SolverConfig:
    """Stopping tolerance, iteration budget, and instrumentation periods."""

    strategy: SelectionStrategy = SelectionStrategy()
    epsilon: float = 1e-4
    max_iters: int = 1_000_000
    patience: int = 1
    exact_gap_every: int = 0
    resync_every: int = 0
    seed: int = 0
    cache_rows: Optional[int] = 1024

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.exact_gap_every < 0 or self.resync_every < 0:
            raise ValueError("periods must be >= 0")


@dataclass
class RunTrace:
    """Ordered per-iteration records plus run timestamps and resync drifts."""

    records: list[StepRecord] = field(default_factory=list)
    resync_events: list[tuple[int, float, Optional[float]]] = field(default_factory=list)
    started_at: str = ""
    finished_at: str = ""

    def write_csv(self, target: Union[str, Path, IO[str]]) -> None:
        if isinstance(target, (str, Path)):
            with open(target, "w", encoding="utf-8") as f:
                self.write_csv(f)
            return
        target.write("iteration,chosen_vertex,lambda,gap_approx,gap_exact,elapsed\n")
        for r in self.records:
            exact = "" if r.gap_exact is None else repr(float(r.gap_exact))
            target.write(
                f"{r.k},{r.chosen_vertex},{float(r.lam)!r},{float(r.gap_approx)!r},"
                f"{exact},{r.elapsed:.6f}\n"
            )


@dataclass
class RunSummary:
    """End-of-run statistics for one solve."""

    mode: str
    sample_size: int
    m: int
    epsilon: float
    seed: int
    iterations: int
    termination: str
    f_final: float
    gap_final: float
    gap_exact_final: float
    sv_count: int
    mu_support: float
    crossover_advisory: Optional[bool]
    cache_hits: int
    cache_misses: int
    cache_evictions: int
    train_time: float
    diag_time: float
    max_f_drift: Optional[float] = None
    max_grad_drift: Optional[float] = None
    accuracy: Optional[float] = None


def solve(
    ds: SparseDataset, spec: KernelSpec, cfg: SolverConfig
) -> tuple[SvmModel, RunTrace, RunSummary]:
    """Run FW from a random vertex until the stopping gap holds for
    `patience` consecutive checks or the iteration budget is exhausted."""
    ka = KernelMatrix(ds, spec, cache_rows=cfg.cache_rows)
    m = ds.m
    sampled = cfg.strategy.kind == KIND_RANDOM
    if sampled and cfg.strategy.sample_size > m:
        raise ValueError(f"sample_size {cfg.strategy.sample_size} exceeds m={m}")

    init_ss, samp_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    i0 = int(np.random.default_rng(init_ss).integers(m))
    state = init_state(ka, i0, maintain_grad=not sampled)
    panel: Optional[SupportPanel] = None
    rng: Optional[np.random.Generator] = None
    if sampled:
        seed = samp_ss if cfg.strategy.seed is None else cfg.strategy.seed
        rng = np.random.default_rng(seed)
        panel = SupportPanel(m)
        panel.append(i0, ka.row(i0))

    records: list[StepRecord] = []
    resync_events: list[tuple[int, float, Optional[float]]] = []
    streak = 0
    termination = TERMINATION_ITERS
    support_total = 0
    diag_time = 0.0
    gap = float("inf")
    started_at = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()

    while state.k < cfg.max_iters:
        it0 = time.perf_counter()
        if not sampled:
            i_sel, gval = select_full(state)
            gap = max(2.0 * state.f_value - gval, 0.0)
            exact_val: Optional[float] = gap
        else:
            i_sel, gval, _ = select_sampled(state, ka, cfg.strategy, rng, panel)
            gap = approx_gap(state, gval)
            exact_val = None
            if cfg.exact_gap_every > 0 and state.k % cfg.exact_gap_every == 0:
                d0 = time.perf_counter()
                exact_val = max(2.0 * state.f_value - float(panel.full_values(state.alpha).min()), 0.0)
                diag_time += time.perf_counter() - d0

        if gap <= cfg.epsilon:
            streak += 1
            if streak >= cfg.patience:
                termination = TERMINATION_GAP
                break
        else:
            streak = 0

        support_total += int(state.support.size)
        state, rec = fw_step(state, i_sel, ka, stop_gap=gap, exact_gap_value=exact_val)
        if sampled:
            if rec.lam >= 1.0:
                panel.reset(i_sel, ka.row(i_sel))
            elif state.support.size > panel.ncols:
                panel.append(i_sel, ka.row(i_sel))
        if cfg.resync_every > 0 and state.k % cfg.resync_every == 0:
            d0 = time.perf_counter()
            state, f_drift, g_drift = resync(state, ka)
            diag_time += time.perf_counter() - d0
            resync_events.append((state.k, f_drift, g_drift))
        rec.elapsed = time.perf_counter() - it0
        records.append(rec)

    total_time = time.perf_counter() - t0

    if not sampled:
        gap_exact_final = max(2.0 * state.f_value - float(state.grad.min()), 0.0)
    else:
        d0 = time.perf_counter()
        gap_exact_final = max(
            2.0 * state.f_value - float(panel.full_values(state.alpha).min()), 0.0
        )
        diag_time += time.perf_counter() - d0
    gap_final = gap if termination == TERMINATION_GAP else (
        records[-1].gap_approx if records else gap_exact_final
    )

    iterations = len(records)
    mu = support_total / iterations if iterations else float(state.support.size)
    crossover = bool(cfg.strategy.sample_size < m / mu) if sampled else None
    model = SvmModel.from_iterate(state.alpha, ds, spec)
    trace = RunTrace(
        records=records,
        resync_events=resync_events,
        started_at=started_at,
        finished_at=datetime.now(timezone.utc).isoformat(),
    )
    summary = RunSummary(
        mode=cfg.strategy.kind,
        sample_size=cfg.strategy.sample_size if sampled else 0,
        m=m,
        epsilon=cfg.epsilon,
        seed=cfg.seed,
        iterations=iterations,
        termination=termination,
        f_final=float(state.f_value),
        gap_final=float(gap_final),
        gap_exact_final=float(gap_exact_final),
        sv_count=int(state.support.size),
        mu_support=float(mu),
        crossover_advisory=crossover,
        cache_hits=ka.cache_hits,
        cache_misses=ka.cache_misses,
        cache_evictions=ka.cache_evictions,
        train_time=total_time - diag_time,
        diag_time=diag_time,
        max_f_drift=max((e[1] for e in resync_events), default=None),
        max_grad_drift=max((e[2] for e in resync_events if e[2] is not None), default=None),
    )
    return model, trace, summary
