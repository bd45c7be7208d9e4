"""Frank-Wolfe iterate state, step, and duality gaps for the simplex QP.

The objective is f(a) = (1/2) a^T K a over the unit simplex. Iterates keep
f maintained by the quadratic expansion and, in full-scan mode, the dense
gradient maintained by the convex-combination recurrence

    grad' = (1 - lambda) * grad + lambda * K[:, i*].

The gradient component used for the line search is always recomputed from
the support through the canonical kernel path, so a step taken at the same
vertex from the same iterate produces bitwise-identical results whether or
not the full gradient is maintained.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .kernel import KernelMatrix


class NumericalDegeneracyError(ArithmeticError):
    """Line-search denominator was non-positive or non-finite."""


@dataclass(frozen=True)
class IterateState:
    """FW iterate: dense simplex vector, support in insertion order,
    maintained objective, optional maintained gradient, iteration count."""

    alpha: np.ndarray
    support: np.ndarray
    f_value: float
    grad: Optional[np.ndarray]
    k: int

    @property
    def m(self) -> int:
        return int(self.alpha.size)


@dataclass
class StepRecord:
    """One iteration: chosen vertex, stepsize, gaps, wall-clock."""

    k: int
    chosen_vertex: int
    lam: float
    gap_approx: float
    gap_exact: Optional[float] = None
    elapsed: float = 0.0


def init_state(ka: KernelMatrix, vertex: int, maintain_grad: bool) -> IterateState:
    """State at alpha = e_vertex; f = K_vv / 2, gradient = K[:, vertex]."""
    if not 0 <= vertex < ka.m:
        raise IndexError(f"vertex {vertex} out of range [0, {ka.m})")
    alpha = np.zeros(ka.m)
    alpha[vertex] = 1.0
    grad = ka.row(vertex).copy() if maintain_grad else None
    return IterateState(
        alpha=alpha,
        support=np.array([vertex], dtype=np.int64),
        f_value=0.5 * ka.diag_value,
        grad=grad,
        k=0,
    )


def _support_dot(evals: np.ndarray, alpha_packed: np.ndarray) -> float:
    return float(np.dot(evals, alpha_packed))


def gradient_component(state: IterateState, ka: KernelMatrix, i: int) -> float:
    """grad_i = sum over the support of K_ij * alpha_j, in O(|I|) entries."""
    if not 0 <= i < state.m:
        raise IndexError(f"index {i} out of range [0, {state.m})")
    supp = np.sort(state.support)
    evals = ka.block([i], supp)[0]
    return _support_dot(evals, state.alpha[supp])


def fw_step(
    state: IterateState,
    vertex: int,
    ka: KernelMatrix,
    stop_gap: Optional[float] = None,
    exact_gap_value: Optional[float] = None,
) -> tuple[IterateState, StepRecord]:
    """One FW step toward e_vertex with exact line search.

    stop_gap, when given, is the selection-side gap recorded in the trace;
    otherwise the record carries 2f - grad_vertex from the recomputation
    done here.
    """
    if not 0 <= vertex < state.m:
        raise IndexError(f"vertex {vertex} out of range [0, {state.m})")
    supp = np.sort(state.support)
    apack = state.alpha[supp]
    if state.grad is not None:
        krow = ka.row(vertex)
        evals = krow[supp]
    else:
        krow = None
        evals = ka.block([vertex], supp)[0]
    g = _support_dot(evals, apack)
    f = state.f_value
    kvv = ka.diag_value
    num = 2.0 * f - g
    den = kvv - 2.0 * g + 2.0 * f

    if num <= 0.0:
        lam = 0.0
        new_state = replace(state, k=state.k + 1)
    else:
        if not np.isfinite(den) or den <= 0.0:
            raise NumericalDegeneracyError(
                f"iteration {state.k}: line-search denominator {den!r} at vertex {vertex}"
            )
        lam = num / den
        if lam >= 1.0:
            lam = 1.0
            alpha = np.zeros(state.m)
            alpha[vertex] = 1.0
            new_state = IterateState(
                alpha=alpha,
                support=np.array([vertex], dtype=np.int64),
                f_value=0.5 * kvv,
                grad=krow.copy() if krow is not None else None,
                k=state.k + 1,
            )
        else:
            new_vertex = state.alpha[vertex] == 0.0
            alpha = state.alpha * (1.0 - lam)
            alpha[vertex] += lam
            support = np.append(state.support, vertex) if new_vertex else state.support
            f_new = f + lam * (g - 2.0 * f) + 0.5 * lam * lam * den
            if state.grad is not None:
                grad = state.grad * (1.0 - lam)
                grad += lam * krow
            else:
                grad = None
            new_state = IterateState(
                alpha=alpha, support=support, f_value=f_new, grad=grad, k=state.k + 1
            )

    record = StepRecord(
        k=state.k,
        chosen_vertex=int(vertex),
        lam=float(lam),
        gap_approx=float(stop_gap) if stop_gap is not None else 2.0 * f - g,
        gap_exact=exact_gap_value,
    )
    return new_state, record


def exact_gap(state: IterateState, ka: KernelMatrix) -> float:
    """Duality gap 2f - min_i grad_i, floored at zero.

    Uses the maintained gradient when present, otherwise recomputes all m
    components from the support in O(m |I|) kernel entries.
    """
    if state.grad is not None:
        mn = float(state.grad.min())
    else:
        supp = np.sort(state.support)
        e = ka.block(np.arange(state.m), supp)
        mn = float((e @ state.alpha[supp]).min())
    return max(2.0 * state.f_value - mn, 0.0)


def approx_gap(state: IterateState, sampled_min_value: float) -> float:
    """2f - (min gradient component over the sample); may be negative."""
    return 2.0 * state.f_value - float(sampled_min_value)


def objective_bruteforce(alpha: np.ndarray, ka: KernelMatrix) -> float:
    """Dense (1/2) a^T K a over the nonzero coordinates; the f oracle."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.size != ka.m:
        raise ValueError(f"alpha has size {alpha.size}, expected {ka.m}")
    if (alpha < 0).any() or abs(float(alpha.sum()) - 1.0) > 1e-9:
        raise ValueError("alpha is not on the unit simplex")
    nz = np.flatnonzero(alpha > 0)
    e = ka.block(nz, nz)
    return 0.5 * float(np.dot(alpha[nz], e @ alpha[nz]))


def resync(state: IterateState, ka: KernelMatrix) -> tuple[IterateState, float, Optional[float]]:
    """Recompute maintained quantities from scratch and swap them in.

    Returns (new state, relative f drift, relative gradient drift). The
    gradient drift is measured in the max norm and is None when the state
    does not maintain a gradient (then only f is recomputed, in O(|I|^2)).
    """
    supp = np.sort(state.support)
    apack = state.alpha[supp]
    if state.grad is not None:
        e = ka.block(np.arange(state.m), supp)
        grad_d = e @ apack
        f_d = 0.5 * float(np.dot(apack, grad_d[supp]))
        g_scale = max(float(np.abs(grad_d).max()), np.finfo(float).tiny)
        grad_drift = float(np.abs(state.grad - grad_d).max()) / g_scale
        new_state = replace(state, f_value=f_d, grad=grad_d)
    else:
        e = ka.block(supp, supp)
        f_d = 0.5 * float(np.dot(apack, e @ apack))
        grad_drift = None
        new_state = replace(state, f_value=f_d)
    f_drift = abs(state.f_value - f_d) / max(abs(f_d), np.finfo(float).tiny)
    return new_state, f_drift, grad_drift
