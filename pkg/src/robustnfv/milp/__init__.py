"""Robust NF provisioning MILPs: construction, LP export and exact solution."""

from .build import (
    DEFAULT_FLOOR,
    LogMode,
    ModelStructure,
    build_nonchained_model,
    build_sfc_model,
    candidate_routings,
    log_weight,
)
from .lpformat import export_lp
from .model import Constraint, MilpModel, ModelError, Variable
from .solve import (
    DEFAULT_GUARD,
    InternalConsistencyError,
    SolveResult,
    branch_and_bound,
    extract_solution,
    recompute_objective,
    solve_exact,
)

__all__ = [
    "DEFAULT_FLOOR",
    "DEFAULT_GUARD",
    "Constraint",
    "InternalConsistencyError",
    "LogMode",
    "MilpModel",
    "ModelError",
    "ModelStructure",
    "SolveResult",
    "Variable",
    "branch_and_bound",
    "build_nonchained_model",
    "build_sfc_model",
    "candidate_routings",
    "export_lp",
    "extract_solution",
    "log_weight",
    "recompute_objective",
    "solve_exact",
]
