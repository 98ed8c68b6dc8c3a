"""Wind-farm active power control: wake simulation, wake-aware coordination
graphs, factored Thompson-sampling set-point learning, and a deterministic
heuristic baseline, with a reproducible experiment harness."""

from .beliefs import BeliefState, init_beliefs
from .farm import (
    FarmLayout,
    SetPointMenu,
    TurbineSpec,
    WindCondition,
    default_farm,
    grid_farm,
    load_farm,
    render_farm,
)
from .graph import CoordinationGraph, build_graph
from .heuristic import run_heuristic
from .regimes import RegimePartition, cluster_regimes, demand_fractions
from .scenario import ScenarioSpec, RunRecord, build_grid, run_grid, run_learner
from .solver import ObjectiveSpec, PenaltyRule, solve_dp, solve_exhaustive
from .wake import FlowResult, evaluate

__version__ = "0.1.0"

__all__ = [
    "BeliefState",
    "CoordinationGraph",
    "FarmLayout",
    "FlowResult",
    "ObjectiveSpec",
    "PenaltyRule",
    "RegimePartition",
    "RunRecord",
    "ScenarioSpec",
    "SetPointMenu",
    "TurbineSpec",
    "WindCondition",
    "build_graph",
    "build_grid",
    "cluster_regimes",
    "default_farm",
    "demand_fractions",
    "evaluate",
    "grid_farm",
    "init_beliefs",
    "load_farm",
    "render_farm",
    "run_grid",
    "run_heuristic",
    "run_learner",
    "solve_dp",
    "solve_exhaustive",
    "__version__",
]
