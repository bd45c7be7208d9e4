"""Command-line front end.

Subcommands: train, benchmark, verify-sampling, predict, make-synthetic.
Every config-file field has a matching flag; an explicit flag wins over the
config file, which wins over the built-in default.

Exit codes: 0 success (both gap-converged and max-iters terminations),
1 usage or config error, 2 I/O or file-format error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import emit_gap_figure_data, plan_from_json, run_benchmark, size_label, verify_sampling
from .dataset import DatasetFormatError, parse_libsvm, save_libsvm
from .kernel import KernelSpec, gamma_from_dim
from .model import ModelFormatError, load_model, predict_dataset, save_model
from .problem import NumericalDegeneracyError
from .selection import SelectionStrategy
from .solver import SolverConfig, solve
from .synthetic import two_clusters


class UsageError(Exception):
    """Bad flags or bad config content; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path}: expected a JSON object")
    return data


_TRAIN_DEFAULTS = {
    "data": None,
    "test": None,
    "gamma": None,
    "gamma_from_dim": False,
    "c": 1.0,
    "epsilon": 1e-4,
    "sample_size": 0,
    "seed": 0,
    "cache_rows": 1024,
    "exact_gap_every": 0,
    "max_iters": 1_000_000,
    "resync_every": 0,
    "patience": 1,
    "out_dir": ".",
    "remap01": False,
    "gap_csv": False,
}


def _merge_settings(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags."""
    cfg = dict(defaults)
    path = getattr(args, "config", None)
    if path is not None:
        loaded = _load_json(path)
        unknown = set(loaded) - set(defaults)
        if unknown:
            raise UsageError(f"config {path}: unknown fields {sorted(unknown)}")
        cfg.update(loaded)
    for key in defaults:
        if key in args.__dict__:
            cfg[key] = args.__dict__[key]
    return cfg


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    # default=SUPPRESS so only explicitly given flags override the config
    S = argparse.SUPPRESS
    p.add_argument("--gamma", type=float, default=S, help="Gaussian kernel width")
    p.add_argument(
        "--gamma-from-dim",
        action="store_true",
        default=S,
        help="use gamma = 1/dim of the training data",
    )
    p.add_argument("--c", type=float, default=S, help="SVM regularization constant (default 1.0)")
    p.add_argument("--epsilon", type=float, default=S, help="stopping gap (default 1e-4)")
    p.add_argument("--seed", type=int, default=S, help="run seed (default 0)")
    p.add_argument("--cache-rows", type=int, default=S, help="LRU kernel-row cache size (default 1024)")
    p.add_argument(
        "--exact-gap-every",
        type=int,
        default=S,
        help="record the exact gap every N iterations in sampled runs (0 = never)",
    )
    p.add_argument("--max-iters", type=int, default=S, help="iteration budget (default 1e6)")
    p.add_argument(
        "--resync-every",
        type=int,
        default=S,
        help="recompute maintained values from scratch every N iterations (0 = never)",
    )
    p.add_argument(
        "--patience",
        type=int,
        default=S,
        help="consecutive gap<=epsilon checks required to stop (default 1)",
    )
    p.add_argument("--remap01", action="store_true", default=S, help="accept 0/1 labels, 0 -> -1")
    p.add_argument("--config", help="JSON config file; flags override its fields")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fwsvm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    t = sub.add_parser("train", help="single solve; writes model.txt and trace.csv")
    t.add_argument("--data", default=S, help="training set (libsvm format)")
    t.add_argument("--test", default=S, help="optional test set for accuracy")
    t.add_argument("--sample-size", type=int, default=S, help="working-set size (0 = full scan)")
    t.add_argument("--out-dir", default=S, help="output directory (default .)")
    t.add_argument(
        "--gap-csv", action="store_true", default=S, help="also write gaps.csv for plotting"
    )
    _add_solver_flags(t)
    t.set_defaults(func=_cmd_train)

    b = sub.add_parser("benchmark", help="run a benchmark plan; writes runs/summary CSVs")
    b.add_argument("--data", default=S, help="training set; overrides the plan's train field")
    b.add_argument("--test", default=S, help="test set; overrides the plan's test field")
    b.add_argument(
        "--sizes", default=S, help="comma list of sampling sizes, e.g. full,500,250,125"
    )
    b.add_argument("--reps", type=int, default=S, help="repetitions per size (default 1)")
    b.add_argument("--out-dir", default="bench-out", help="output directory")
    b.add_argument(
        "--gap-csv",
        action="store_true",
        default=False,
        help="emit gaps.csv from the first repetition of each size",
    )
    _add_solver_flags(b)
    b.set_defaults(func=_cmd_benchmark)

    v = sub.add_parser("verify-sampling", help="check the sampling bound by Monte Carlo")
    v.add_argument("--m", type=int, required=True, help="population size")
    v.add_argument("--m-tilde", type=int, required=True, help="tolerated tail size")
    v.add_argument("--sample-size", type=int, required=True, help="working-set size r")
    v.add_argument("--trials", type=int, default=10000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=_cmd_verify)

    p = sub.add_parser("predict", help="evaluate a saved model on a labeled file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="labeled points (libsvm format)")
    p.add_argument("--remap01", action="store_true", default=False)
    p.set_defaults(func=_cmd_predict)

    g = sub.add_parser("make-synthetic", help="write a two-cluster dataset in libsvm format")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--d", type=int, default=6)
    g.add_argument("--sep", type=float, default=3.0)
    g.add_argument("--flip", type=float, default=0.03)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_make_synthetic)

    return parser


def _resolve_spec(cfg: dict, ds) -> KernelSpec:
    gamma = cfg["gamma"]
    if cfg["gamma_from_dim"]:
        gamma = gamma_from_dim(ds)
    if gamma is None:
        raise UsageError("--gamma is required (or pass --gamma-from-dim)")
    return KernelSpec(gamma=float(gamma), c=float(cfg["c"]))


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = _merge_settings(args, _TRAIN_DEFAULTS)
    if cfg["data"] is None:
        raise UsageError("--data is required")
    train = parse_libsvm(cfg["data"], remap01=cfg["remap01"])
    spec = _resolve_spec(cfg, train)
    size = int(cfg["sample_size"])
    strategy = (
        SelectionStrategy()
        if size == 0
        else SelectionStrategy(kind="random", sample_size=size)
    )
    solver_cfg = SolverConfig(
        strategy=strategy,
        epsilon=float(cfg["epsilon"]),
        max_iters=int(cfg["max_iters"]),
        patience=int(cfg["patience"]),
        exact_gap_every=int(cfg["exact_gap_every"]),
        resync_every=int(cfg["resync_every"]),
        seed=int(cfg["seed"]),
        cache_rows=int(cfg["cache_rows"]),
    )
    model, trace, summary = solve(train, spec, solver_cfg)

    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    model_path = out / "model.txt"
    trace_path = out / "trace.csv"
    save_model(model, model_path)
    trace.write_csv(trace_path)

    lines = [
        ("mode", summary.mode if size == 0 else f"{summary.mode} (|S|={size})"),
        ("m", summary.m),
        ("gamma", repr(spec.gamma)),
        ("termination", summary.termination),
        ("iterations", summary.iterations),
        ("f_final", repr(summary.f_final)),
        ("gap_final", repr(summary.gap_final)),
        ("gap_exact_final", repr(summary.gap_exact_final)),
        ("support_vectors", summary.sv_count),
        ("mu_support", f"{summary.mu_support:.2f}"),
    ]
    if summary.crossover_advisory is not None:
        verdict = "sampling beneficial" if summary.crossover_advisory else "full scan likely faster"
        lines.append(("crossover", f"{verdict} (threshold m/mu = {summary.m / summary.mu_support:.1f})"))
    lines += [
        (
            "cache",
            f"hits={summary.cache_hits} misses={summary.cache_misses} "
            f"evictions={summary.cache_evictions}",
        ),
        ("train_time_s", f"{summary.train_time:.6f}"),
        ("diag_time_s", f"{summary.diag_time:.6f}"),
    ]
    if summary.max_f_drift is not None:
        lines.append(("max_f_drift", repr(summary.max_f_drift)))
    if summary.max_grad_drift is not None:
        lines.append(("max_grad_drift", repr(summary.max_grad_drift)))
    if cfg["test"] is not None:
        test = parse_libsvm(cfg["test"], remap01=cfg["remap01"])
        preds = predict_dataset(model, test)
        errs = int((preds != test.labels).sum())
        lines.append(("test_accuracy", f"{100.0 * (1.0 - errs / test.m):.2f}% ({errs}/{test.m} errors)"))
    lines += [("model", str(model_path)), ("trace", str(trace_path))]
    for key, val in lines:
        print(f"{key:<18}{val}")

    if cfg["gap_csv"]:
        gap_path = out / "gaps.csv"
        try:
            emit_gap_figure_data({size_label(size): trace}, gap_path)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        print(f"{'gap_csv':<18}{gap_path}")
    return 0


_BENCH_FLAG_FIELDS = (
    "gamma",
    "c",
    "epsilon",
    "reps",
    "seed",
    "max_iters",
    "patience",
    "cache_rows",
    "exact_gap_every",
    "resync_every",
    "remap01",
)


def _cmd_benchmark(args: argparse.Namespace) -> int:
    raw = _load_json(args.config) if getattr(args, "config", None) else {}
    if "data" in args.__dict__:
        raw["train"] = args.data
    if "test" in args.__dict__:
        raw["test"] = args.test
    if "sizes" in args.__dict__:
        raw["sizes"] = [tok for tok in args.sizes.split(",") if tok.strip()]
    for key in _BENCH_FLAG_FIELDS:
        if key in args.__dict__:
            raw[key] = args.__dict__[key]
    if "gamma_from_dim" in args.__dict__:
        raise UsageError("--gamma-from-dim is not supported for benchmark plans; set gamma")
    try:
        plan = plan_from_json(raw)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None

    result = run_benchmark(plan, args.out_dir, gap_csv=args.gap_csv)

    widths = (8, 5, 14, 22, 20, 18, 16)
    header = ("size", "reps", "seeds", "acc_pct", "time_s", "iter", "svs")
    print("".join(h.ljust(w) for h, w in zip(header, widths)))

    def cell_fmt(mean, std, prec):
        if mean is None:
            return "-"
        if std is None:
            return f"{mean:.{prec}f}"
        return f"{mean:.{prec}f} +/- {std:.{prec}f}"

    for cell in result.cells:
        row = (
            cell["size"],
            str(cell["reps"]),
            cell["seeds"],
            cell_fmt(cell["acc_pct_mean"], cell["acc_pct_std"], 2),
            cell_fmt(cell["time_mean"], cell["time_std"], 3),
            cell_fmt(cell["iter_mean"], cell["iter_std"], 1),
            cell_fmt(cell["sv_mean"], cell["sv_std"], 1),
        )
        print("".join(v.ljust(w) for v, w in zip(row, widths)))
    print(f"runs    {result.runs_csv}")
    print(f"summary {result.summary_csv}")
    if result.gap_csv is not None:
        print(f"gaps    {result.gap_csv}")
    for r in result.errors:
        print(
            f"warning: size={size_label(r.size)} seed={r.seed} aborted: {r.error}",
            file=sys.stderr,
        )
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    try:
        report = verify_sampling(args.m, args.m_tilde, args.sample_size, args.trials, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for line in report.format_lines():
        print(line)
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    data = parse_libsvm(args.data, remap01=args.remap01)
    preds = predict_dataset(model, data)
    errs = int((preds != data.labels).sum())
    print(f"points            {data.m}")
    print(f"errors            {errs}")
    print(f"accuracy          {100.0 * (1.0 - errs / data.m):.2f}%")
    return 0


def _cmd_make_synthetic(args: argparse.Namespace) -> int:
    ds = two_clusters(args.m, args.seed, d=args.d, sep=args.sep, flip=args.flip)
    save_libsvm(ds, args.out)
    print(f"wrote {args.out} (m={ds.m}, d={ds.dim})")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DatasetFormatError, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalDegeneracyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())
