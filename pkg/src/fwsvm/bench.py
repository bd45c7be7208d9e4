"""Benchmark harness: multi-seed grids over sampling sizes, CSV reporting,
gap-trace emission, and the sampling-probability verifier.

A plan runs `reps` solves per sampling size with seeds base..base+reps-1
(assigned per cell, so re-running a plan reproduces every number except
wall-clock). Outputs: runs.csv (one row per solve), summary.csv (per-size
aggregates: accuracy, time, iterations, SVs), one trace CSV per run, and
optionally a long-format gap CSV for external plotting.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Mapping, Optional, Sequence, Union

import numpy as np

from .dataset import SparseDataset, parse_libsvm, subsample
from .kernel import KernelSpec
from .model import evaluate
from .problem import NumericalDegeneracyError
from .selection import SelectionStrategy, sampling_bound, sampling_montecarlo
from .solver import RunSummary, RunTrace, SolverConfig, solve
from .synthetic import two_clusters


@dataclass(frozen=True)
class SyntheticSpec:
    """Inline recipe for a synthetic two-cluster dataset side."""

    m: int
    seed: int = 0
    d: int = 6
    sep: float = 3.0
    flip: float = 0.03

    def build(self) -> SparseDataset:
        return two_clusters(self.m, self.seed, d=self.d, sep=self.sep, flip=self.flip)


DataSource = Union[str, Path, SyntheticSpec]


@dataclass(frozen=True)
class BenchPlan:
    """One benchmark grid: dataset sides, kernel, sizes, reps, seeds."""

    train: DataSource
    gamma: float
    c: float
    sizes: tuple[int, ...]
    reps: int
    seed: int
    test: Optional[DataSource] = None
    epsilon: float = 1e-4
    max_iters: int = 1_000_000
    patience: int = 1
    cache_rows: int = 1024
    exact_gap_every: int = 0
    resync_every: int = 0
    subsample_n: Optional[int] = None
    subsample_seed: int = 0
    remap01: bool = False

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("plan needs at least one sampling size")
        if any(s < 0 for s in self.sizes):
            raise ValueError("sampling sizes must be >= 0 (0 = full scan)")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")


def parse_size(token: Union[str, int]) -> int:
    """'full' or 0 means the full scan; positive integers are |S|."""
    if isinstance(token, str):
        if token.strip().lower() == "full":
            return 0
        token = int(token)
    if token < 0:
        raise ValueError(f"invalid sampling size {token}")
    return int(token)


def size_label(size: int) -> str:
    return "full" if size == 0 else str(size)


def _source_from_json(node, what: str) -> DataSource:
    if isinstance(node, str):
        return node
    if isinstance(node, dict) and "synthetic" in node:
        return SyntheticSpec(**node["synthetic"])
    raise ValueError(f"plan field {what!r} must be a path or {{\"synthetic\": {{...}}}}")


def plan_from_json(source: Union[str, Path, dict]) -> BenchPlan:
    """Load a plan from a JSON file (or an already-parsed dict)."""
    if not isinstance(source, dict):
        with open(source, "r", encoding="utf-8") as f:
            source = json.load(f)
    data = dict(source)
    if "train" not in data:
        raise ValueError("plan is missing 'train'")
    train = _source_from_json(data.pop("train"), "train")
    test = data.pop("test", None)
    if test is not None:
        test = _source_from_json(test, "test")
    sub = data.pop("subsample", None)
    kwargs = {}
    if sub is not None:
        kwargs["subsample_n"] = int(sub["n"])
        kwargs["subsample_seed"] = int(sub.get("seed", 0))
    try:
        sizes = tuple(parse_size(s) for s in data.pop("sizes"))
        plan = BenchPlan(
            train=train,
            test=test,
            gamma=float(data.pop("gamma")),
            c=float(data.pop("c", 1.0)),
            sizes=sizes,
            reps=int(data.pop("reps", 1)),
            seed=int(data.pop("seed", 0)),
            epsilon=float(data.pop("epsilon", 1e-4)),
            max_iters=int(data.pop("max_iters", 1_000_000)),
            patience=int(data.pop("patience", 1)),
            cache_rows=int(data.pop("cache_rows", 1024)),
            exact_gap_every=int(data.pop("exact_gap_every", 0)),
            resync_every=int(data.pop("resync_every", 0)),
            remap01=bool(data.pop("remap01", False)),
            **kwargs,
        )
    except KeyError as exc:
        raise ValueError(f"plan is missing {exc.args[0]!r}") from None
    if data:
        raise ValueError(f"unknown plan fields: {sorted(data)}")
    return plan


def _load_side(source: DataSource, remap01: bool) -> SparseDataset:
    if isinstance(source, SyntheticSpec):
        return source.build()
    return parse_libsvm(source, remap01=remap01)


@dataclass
class RunRow:
    size: int
    seed: int
    summary: Optional[RunSummary]
    serialize_time: float = 0.0
    error: Optional[str] = None


@dataclass
class BenchResult:
    runs: list[RunRow] = field(default_factory=list)
    cells: list[dict] = field(default_factory=list)
    runs_csv: Optional[Path] = None
    summary_csv: Optional[Path] = None
    gap_csv: Optional[Path] = None

    @property
    def errors(self) -> list[RunRow]:
        return [r for r in self.runs if r.error is not None]


_RUN_COLUMNS = (
    "size,seed,iterations,termination,f_final,gap_final,gap_exact_final,sv_count,"
    "mu_support,crossover_advisory,cache_hits,cache_misses,cache_evictions,"
    "train_time,diag_time,serialize_time,accuracy"
)


def _fmt_opt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _std(xs: Sequence[float]) -> Optional[float]:
    if len(xs) < 2:
        return None
    return float(np.std(np.asarray(xs, dtype=np.float64), ddof=1))


def run_benchmark(
    plan: BenchPlan, out_dir: Union[str, Path], gap_csv: bool = False
) -> BenchResult:
    """Execute the plan; write runs.csv, summary.csv, and per-run traces.

    gap_csv additionally emits gaps.csv with the first repetition of each
    size as approximate/exact series (requires exact_gap_every > 0 for
    sampled sizes to produce an exact series).
    """
    out = Path(out_dir)
    traces_dir = out / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)

    train = _load_side(plan.train, plan.remap01)
    if plan.subsample_n is not None:
        train = subsample(train, plan.subsample_n, plan.subsample_seed)
    test = _load_side(plan.test, plan.remap01) if plan.test is not None else None
    spec = KernelSpec(gamma=plan.gamma, c=plan.c)

    result = BenchResult()
    first_traces: dict[str, RunTrace] = {}
    for size in plan.sizes:
        for rep in range(plan.reps):
            seed = plan.seed + rep
            if size == 0:
                strategy = SelectionStrategy()
            else:
                strategy = SelectionStrategy(kind="random", sample_size=size)
            cfg = SolverConfig(
                strategy=strategy,
                epsilon=plan.epsilon,
                max_iters=plan.max_iters,
                patience=plan.patience,
                exact_gap_every=plan.exact_gap_every,
                resync_every=plan.resync_every,
                seed=seed,
                cache_rows=plan.cache_rows,
            )
            try:
                model, trace, summary = solve(train, spec, cfg)
            except NumericalDegeneracyError as exc:
                # a degenerate run voids the whole cell's aggregate
                result.runs.append(RunRow(size=size, seed=seed, summary=None, error=str(exc)))
                break
            if test is not None:
                summary.accuracy = evaluate(model, test)
            t0 = time.perf_counter()
            trace.write_csv(traces_dir / f"{size_label(size)}-seed{seed}.csv")
            ser = time.perf_counter() - t0
            if rep == 0:
                first_traces[size_label(size)] = trace
            result.runs.append(RunRow(size=size, seed=seed, summary=summary, serialize_time=ser))

    result.runs_csv = out / "runs.csv"
    with open(result.runs_csv, "w", encoding="utf-8") as f:
        f.write(_RUN_COLUMNS + "\n")
        for r in result.runs:
            s = r.summary
            if s is None:
                blanks = [""] * (len(_RUN_COLUMNS.split(",")) - 4)
                f.write(",".join([size_label(r.size), str(r.seed), "", "error"] + blanks) + "\n")
                continue
            f.write(
                ",".join(
                    [
                        size_label(r.size),
                        str(r.seed),
                        str(s.iterations),
                        s.termination,
                        repr(s.f_final),
                        repr(s.gap_final),
                        repr(s.gap_exact_final),
                        str(s.sv_count),
                        repr(s.mu_support),
                        _fmt_opt(s.crossover_advisory),
                        str(s.cache_hits),
                        str(s.cache_misses),
                        str(s.cache_evictions),
                        f"{s.train_time:.6f}",
                        f"{s.diag_time:.6f}",
                        f"{r.serialize_time:.6f}",
                        _fmt_opt(s.accuracy),
                    ]
                )
                + "\n"
            )

    for size in plan.sizes:
        rows = [r for r in result.runs if r.size == size]
        good = [r for r in rows if r.summary is not None]
        iters = [r.summary.iterations for r in good]
        svs = [r.summary.sv_count for r in good]
        times = [r.summary.train_time for r in good]
        accs = [r.summary.accuracy for r in good if r.summary.accuracy is not None]
        terms: dict[str, int] = {}
        for r in rows:
            key = "error" if r.summary is None else r.summary.termination
            terms[key] = terms.get(key, 0) + 1
        acc_std = _std(accs) if accs else None
        cell = {
            "size": size_label(size),
            "reps": len(good),
            "seeds": f"{plan.seed}..{plan.seed + plan.reps - 1}",
            "acc_pct_mean": 100.0 * float(np.mean(accs)) if accs else None,
            "acc_pct_std": 100.0 * acc_std if acc_std is not None else None,
            "time_mean": float(np.mean(times)) if good else None,
            "time_std": _std(times) if good else None,
            "iter_mean": float(np.mean(iters)) if good else None,
            "iter_std": _std(iters) if good else None,
            "sv_mean": float(np.mean(svs)) if good else None,
            "sv_std": _std(svs) if good else None,
            "terminations": ";".join(f"{k}={v}" for k, v in sorted(terms.items())),
        }
        result.cells.append(cell)

    result.summary_csv = out / "summary.csv"
    cols = (
        "size,reps,seeds,acc_pct_mean,acc_pct_std,time_mean,time_std,"
        "iter_mean,iter_std,sv_mean,sv_std,terminations"
    )
    with open(result.summary_csv, "w", encoding="utf-8") as f:
        f.write(cols + "\n")
        for cell in result.cells:
            f.write(",".join(_fmt_opt(cell[c]) for c in cols.split(",")) + "\n")

    if gap_csv:
        result.gap_csv = out / "gaps.csv"
        emit_gap_figure_data(first_traces, result.gap_csv)
    return result


def emit_gap_figure_data(
    traces: Mapping[str, RunTrace],
    target: Union[str, Path, IO[str]],
    gaps: Sequence[str] = ("approx", "exact"),
) -> None:
    """Long-format CSV (series,iteration,gap) for external log-scale plots.

    Approximate and exact gaps become distinct series per trace label. A
    requested exact series fails loudly when the trace carries no exact
    values (exact_gap_every was 0 for a sampled run).
    """
    for kind in gaps:
        if kind not in ("approx", "exact"):
            raise ValueError(f"unknown gap series {kind!r}")
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as f:
            emit_gap_figure_data(traces, f, gaps)
        return
    target.write("series,iteration,gap\n")
    for label, trace in traces.items():
        if "exact" in gaps and not any(r.gap_exact is not None for r in trace.records):
            raise ValueError(
                f"trace {label!r} has no exact-gap values; run with exact_gap_every > 0 "
                "to record the exact series (full-scan runs always record it)"
            )
        if "approx" in gaps:
            for r in trace.records:
                target.write(f"{label}/approx,{r.k},{float(r.gap_approx)!r}\n")
        if "exact" in gaps:
            for r in trace.records:
                if r.gap_exact is not None:
                    target.write(f"{label}/exact,{r.k},{float(r.gap_exact)!r}\n")


@dataclass(frozen=True)
class SamplingReport:
    m: int
    m_tilde: int
    r: int
    trials: int
    bound: float
    empirical: float
    sigma: float
    passed: bool

    def format_lines(self) -> list[str]:
        return [
            f"sampling check: m={self.m} m_tilde={self.m_tilde} r={self.r} trials={self.trials}",
            f"analytic bound   {self.bound:.6f}",
            f"empirical        {self.empirical:.6f}",
            f"verdict          {'PASS' if self.passed else 'FAIL'} "
            f"(pass iff empirical >= bound - 3*sigma; sigma={self.sigma:.6f})",
        ]


def verify_sampling(m: int, m_tilde: int, r: int, trials: int, seed: int = 0) -> SamplingReport:
    """Analytic bound vs Monte-Carlo estimate, PASS iff within 3 sigma."""
    bound = sampling_bound(m, m_tilde, r)
    empirical = sampling_montecarlo(m, m_tilde, r, trials, seed)
    sigma = math.sqrt(max(bound * (1.0 - bound), 0.0) / trials)
    return SamplingReport(
        m=m,
        m_tilde=m_tilde,
        r=r,
        trials=trials,
        bound=bound,
        empirical=empirical,
        sigma=sigma,
        passed=empirical >= bound - 3.0 * sigma,
    )
