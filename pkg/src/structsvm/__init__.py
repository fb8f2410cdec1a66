"""Structural SVM training with Frank-Wolfe dual solvers.

The library trains linear structured predictors by maximizing a closed-form
dual bound over per-example lower-bounding planes. Three solver variants
share the machinery: whole-plane updates ("fw"), block-coordinate updates
("bcfw"), and the multi-plane extension ("mp-bcfw") that caches oracle
planes per example and interleaves cheap approximate passes with exact
ones, with optional weighted iterate averaging ("-avg"). Built-in tasks
cover multiclass classification, chain sequence labeling (Viterbi oracle),
and binary Potts segmentation (min-cut oracle).
"""

from .autotune import IterationProgress, should_continue_approx
from .datasets import (
    Dataset,
    DatasetFormatError,
    ModelFormatError,
    check_model_compatible,
    generate,
    generate_binary_potts,
    generate_chain,
    generate_multiclass,
    load_binary_potts,
    load_chain,
    load_dataset,
    load_model,
    load_multiclass,
    save_dataset,
    save_model,
)
from .maxflow import (
    BinaryEnergy,
    FlowNetwork,
    energy_of,
    energy_to_network,
    max_flow,
    minimize_binary_energy,
)
from .oracles import (
    CapacityError,
    OracleResult,
    TaskInstance,
    brute_force_oracle,
    max_oracle,
    plane_for_label,
)
from .planes import DualState, Plane, dual_bound, line_search_gamma, weights_of
from .solver import (
    ALGORITHMS,
    AveragingState,
    SolverConfig,
    TrainEvent,
    TrainResult,
    WorkingSet,
    bcfw_exact_pass,
    error_rate,
    fw_iteration,
    mpbcfw_approx_pass,
    primal_objective,
    train,
)
from .tasks import (
    BinaryPottsTask,
    ChainTask,
    MulticlassTask,
    binary_potts_oracle,
    chain_viterbi_oracle,
    multiclass_oracle,
)
from .trace import TRACE_COLUMNS, TraceRecord, dual_at_exact_calls, read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AveragingState",
    "BinaryEnergy",
    "BinaryPottsTask",
    "CapacityError",
    "ChainTask",
    "Dataset",
    "DatasetFormatError",
    "DualState",
    "FlowNetwork",
    "IterationProgress",
    "ModelFormatError",
    "MulticlassTask",
    "OracleResult",
    "Plane",
    "SolverConfig",
    "TRACE_COLUMNS",
    "TaskInstance",
    "TraceRecord",
    "TrainEvent",
    "TrainResult",
    "WorkingSet",
    "bcfw_exact_pass",
    "binary_potts_oracle",
    "brute_force_oracle",
    "chain_viterbi_oracle",
    "check_model_compatible",
    "dual_at_exact_calls",
    "dual_bound",
    "energy_of",
    "energy_to_network",
    "error_rate",
    "fw_iteration",
    "generate",
    "generate_binary_potts",
    "generate_chain",
    "generate_multiclass",
    "line_search_gamma",
    "load_binary_potts",
    "load_chain",
    "load_dataset",
    "load_model",
    "load_multiclass",
    "max_flow",
    "max_oracle",
    "minimize_binary_energy",
    "mpbcfw_approx_pass",
    "multiclass_oracle",
    "plane_for_label",
    "primal_objective",
    "read_trace",
    "save_dataset",
    "save_model",
    "should_continue_approx",
    "train",
    "weights_of",
    "write_trace",
]
