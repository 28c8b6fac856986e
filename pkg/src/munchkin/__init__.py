"""Hybrid test generation over a mini integer IR.

Coverage-guided fuzzing, symbolic execution with a directed (sonar) search
strategy, the two hybrid campaign modes that combine them, and a generator
of range-dispatch tree programs with exactly known coverage ground truth.
"""

from .ir import (
    IRError,
    ParseError,
    Program,
    ValidationError,
    count_branches,
    parse_program,
    serialize_program,
)
from .generator import GenParams, generate_program, ground_truth_coverage
from .callgraph import (
    CallGraph,
    DistanceCache,
    DistanceField,
    build_callgraph,
    frontier_set,
    sonar_distances,
)
from .executor import (
    CoverageMap,
    InputVector,
    Outcome,
    RunResult,
    merge_coverage,
    run_concrete,
)
from .fuzzer import FuzzConfig, FuzzResult, fuzz_campaign, mutate
from .symex import (
    Solver,
    SolverStats,
    Strategy,
    SymexLimits,
    SymResult,
    symex_campaign,
)
from .orchestrator import (
    CampaignReport,
    HybridConfig,
    run_baselines,
    run_fs,
    run_hybrid,
    run_sf,
)

__all__ = [
    "CallGraph",
    "CampaignReport",
    "CoverageMap",
    "DistanceCache",
    "DistanceField",
    "FuzzConfig",
    "FuzzResult",
    "GenParams",
    "HybridConfig",
    "IRError",
    "InputVector",
    "Outcome",
    "ParseError",
    "Program",
    "RunResult",
    "Solver",
    "SolverStats",
    "Strategy",
    "SymResult",
    "SymexLimits",
    "ValidationError",
    "build_callgraph",
    "count_branches",
    "frontier_set",
    "fuzz_campaign",
    "generate_program",
    "ground_truth_coverage",
    "merge_coverage",
    "mutate",
    "parse_program",
    "run_baselines",
    "run_concrete",
    "run_fs",
    "run_hybrid",
    "run_sf",
    "serialize_program",
    "sonar_distances",
    "symex_campaign",
]
