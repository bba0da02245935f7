"""NF placement on SFC-Fork forwarding graphs via facility location."""

from .greedy import brute_force_1fl, greedy_1fl, grow_budgets
from .instance import FacLocInstance, FLSolution, ForkInstance, ForkSolution, InfeasibleForkError, MetricViolation, Request
from .reduction import Reduction, convert_requests, level_paths, reduce_1sfc, two_step_reduction
from .solve import (
    DEFAULT_DELTA,
    LemmaReport,
    SForkTrace,
    bifactors,
    brute_force_sfork,
    check_lemma_inequalities,
    forest_merge,
    lift_solution,
    reroute,
    solve_sfork,
)

__all__ = [
    "DEFAULT_DELTA",
    "FLSolution",
    "FacLocInstance",
    "ForkInstance",
    "ForkSolution",
    "InfeasibleForkError",
    "LemmaReport",
    "MetricViolation",
    "Reduction",
    "Request",
    "SForkTrace",
    "bifactors",
    "brute_force_1fl",
    "brute_force_sfork",
    "check_lemma_inequalities",
    "convert_requests",
    "forest_merge",
    "greedy_1fl",
    "grow_budgets",
    "level_paths",
    "lift_solution",
    "reduce_1sfc",
    "reroute",
    "solve_sfork",
    "two_step_reduction",
]
