"""Frank-Wolfe training for L2-SVMs with randomized working-set selection.

The solver runs plain FW on the simplex-constrained dual with an exact
line search, maintains the gradient through the rank-one update, and can
restrict each vertex search to a uniformly sampled working set. The
effective kernel folds the bias and slack terms into a Gaussian base so
the dual is a standard QP over the unit simplex.
"""

from .bench import (
    BenchPlan,
    BenchResult,
    SamplingReport,
    SyntheticSpec,
    emit_gap_figure_data,
    parse_size,
    plan_from_json,
    run_benchmark,
    size_label,
    verify_sampling,
)
from .dataset import (
    DatasetFormatError,
    SparseDataset,
    SparseRow,
    parse_libsvm,
    parse_libsvm_text,
    save_libsvm,
    subsample,
    to_libsvm,
)
from .kernel import (
    MODE_EFFECTIVE,
    MODE_RAW,
    KernelCache,
    KernelMatrix,
    KernelSpec,
    effective_entry,
    gamma_from_dim,
    gaussian,
)
from .model import (
    ModelFormatError,
    SvmModel,
    evaluate,
    load_model,
    predict,
    predict_dataset,
    save_model,
)
from .problem import (
    IterateState,
    NumericalDegeneracyError,
    StepRecord,
    approx_gap,
    exact_gap,
    fw_step,
    gradient_component,
    init_state,
    objective_bruteforce,
    resync,
)
from .selection import (
    SelectionStrategy,
    sampling_bound,
    sampling_montecarlo,
    select_full,
    select_sampled,
)
from .solver import (
    TERMINATION_GAP,
    TERMINATION_ITERS,
    RunSummary,
    RunTrace,
    SolverConfig,
    SupportPanel,
    solve,
)
from .synthetic import two_clusters

__version__ = "0.1.0"

__all__ = [
    "BenchPlan",
    "BenchResult",
    "DatasetFormatError",
    "IterateState",
    "KernelCache",
    "KernelMatrix",
    "KernelSpec",
    "MODE_EFFECTIVE",
    "MODE_RAW",
    "ModelFormatError",
    "NumericalDegeneracyError",
    "RunSummary",
    "RunTrace",
    "SamplingReport",
    "SelectionStrategy",
    "SolverConfig",
    "SparseDataset",
    "SparseRow",
    "StepRecord",
    "SupportPanel",
    "SvmModel",
    "SyntheticSpec",
    "TERMINATION_GAP",
    "TERMINATION_ITERS",
    "approx_gap",
    "effective_entry",
    "emit_gap_figure_data",
    "evaluate",
    "exact_gap",
    "fw_step",
    "gamma_from_dim",
    "gaussian",
    "gradient_component",
    "init_state",
    "load_model",
    "objective_bruteforce",
    "parse_libsvm",
    "parse_libsvm_text",
    "parse_size",
    "plan_from_json",
    "predict",
    "predict_dataset",
    "resync",
    "run_benchmark",
    "sampling_bound",
    "sampling_montecarlo",
    "save_libsvm",
    "save_model",
    "select_full",
    "select_sampled",
    "size_label",
    "solve",
    "subsample",
    "to_libsvm",
    "two_clusters",
    "verify_sampling",
]
