"""Sparsity-inducing personalized PageRank: local solvers, work accounting,
confinement diagnostics, analytic instances, and a sweep harness."""

from .diagnostics import (
    ConfinementReport,
    JumpViolation,
    NoPercolationReport,
    SlackReport,
    TwoTierSplit,
    check_no_percolation,
    conservative_degree_cutoff,
    degree_cutoff,
    jump_audit,
    slacks,
    two_tier_split,
    verify_confinement,
)
from .graph import (
    Graph,
    NodeSet,
    build_from_edges,
    exterior,
    parse_snap_edgelist,
    vertex_boundary,
    volume,
)
from .kernels import BACKEND_ENV_VAR, HAS_NUMBA, active_backend
from .objective import (
    ProblemParams,
    SparseVector,
    forward_map,
    gradient,
    kkt_residual,
    objective_value,
    prox,
)
from .solver import (
    EnvelopePoint,
    IterationRecord,
    NumericalDivergenceError,
    Solution,
    SolveTrace,
    SolverConfig,
    fista_momentum,
    rate_envelope,
    solve,
)
from .sweep import (
    AggregateRow,
    AutotuneResult,
    SweepResult,
    SweepRow,
    SweepSpec,
    TradeoffRow,
    aggregate,
    autotune,
    log_grid,
    run_sweep,
    sample_seeds,
    tradeoff_ratios,
    write_rows_csv,
)
from .synth import (
    AnalyticInstance,
    RegionPartition,
    SynthParams,
    generate,
    generate_alpha_sweep_instance,
    path_instance,
    star_instance,
)

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "NodeSet",
    "build_from_edges",
    "parse_snap_edgelist",
    "volume",
    "vertex_boundary",
    "exterior",
    "SparseVector",
    "ProblemParams",
    "gradient",
    "prox",
    "forward_map",
    "objective_value",
    "kkt_residual",
    "BACKEND_ENV_VAR",
    "HAS_NUMBA",
    "active_backend",
    "SolverConfig",
    "SolveTrace",
    "IterationRecord",
    "Solution",
    "NumericalDivergenceError",
    "fista_momentum",
    "solve",
    "rate_envelope",
    "EnvelopePoint",
    "SynthParams",
    "RegionPartition",
    "AnalyticInstance",
    "generate",
    "generate_alpha_sweep_instance",
    "star_instance",
    "path_instance",
    "SlackReport",
    "TwoTierSplit",
    "NoPercolationReport",
    "ConfinementReport",
    "JumpViolation",
    "slacks",
    "two_tier_split",
    "check_no_percolation",
    "verify_confinement",
    "degree_cutoff",
    "conservative_degree_cutoff",
    "jump_audit",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "AggregateRow",
    "TradeoffRow",
    "AutotuneResult",
    "log_grid",
    "sample_seeds",
    "run_sweep",
    "aggregate",
    "tradeoff_ratios",
    "write_rows_csv",
    "autotune",
    "__version__",
]
