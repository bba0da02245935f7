"""Robustness metrics for a deployment: RP, FP, duality checks, exact reliability.

Which deployed copies may serve NF ``f`` on a routing:

* unordered demand: every copy of ``f`` hosted on the walk;
* chained demand with anchors: copies of ``f`` between the anchors of the
  neighbouring NFs (inclusive);
* chained demand without anchors: copies of ``f`` at walk positions that
  admit an in-order completion of the rest of the chain.

Positions along a chain are nondecreasing, so one node may serve
consecutive NFs.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .netmodel import Demand, Deployment, Routing, Scenario, node_key
from .pathfind import enumerate_paths_oracle

__all__ = [
    "Deployment",
    "MetricReport",
    "ReliabilityGuardError",
    "all_deployments",
    "duality_report",
    "exact_reliability",
    "fp_demand",
    "routing_rp",
    "rp_demand",
    "serving_positions",
    "system_metrics",
    "verify_duality",
]

TOL = 1e-12
PathSets = Mapping[int, Sequence[Routing]] | None


class ReliabilityGuardError(RuntimeError):
    pass


def serving_positions(deployment: Deployment, demand: Demand, routing: Routing) -> dict[str, list[int]]:
    """Walk positions whose host may serve each NF of ``demand``."""
    path = routing.path
    hosted = {f: [j for j, i in enumerate(path) if i in deployment.hosts(f)] for f in demand.nfs}
    if not demand.ordered:
        return hosted
    nfs = demand.nfs
    m = len(nfs)
    if routing.anchors:
        anchor = routing.anchor_map
        out = {}
        for k, f in enumerate(nfs):
            lo = anchor[nfs[k - 1]] if k > 0 else 0
            hi = anchor[nfs[k + 1]] if k + 1 < m else len(path) - 1
            out[f] = [j for j in hosted[f] if lo <= j <= hi]
        return out
    early: list[int] = []
    for f in nfs:
        nxt = [j for j in hosted[f] if j >= (early[-1] if early else 0)]
        if not nxt:
            return {f: [] for f in nfs}
        early.append(nxt[0])
    late = [0] * m
    for k in range(m - 1, -1, -1):
        bound = late[k + 1] if k + 1 < m else len(path) - 1
        late[k] = max(j for j in hosted[nfs[k]] if j <= bound)
    return {
        f: [j for j in hosted[f] if (early[k - 1] if k else 0) <= j <= (late[k + 1] if k + 1 < m else len(path) - 1)]
        for k, f in enumerate(nfs)
    }


def _fail_product(scenario: Scenario, path: Sequence[str], positions: Iterable[int]) -> float | None:
    nodes = {path[j] for j in positions}
    if not nodes:
        return None
    return math.prod(scenario.network.rho(i) for i in sorted(nodes, key=node_key))


def routing_rp(scenario: Scenario, deployment: Deployment, demand: Demand, routing: Routing) -> float:
    """Worst per-NF survival on one routing, before the chain factorial."""
    pos = serving_positions(deployment, demand, routing)
    vals = []
    for f in demand.nfs:
        prod = _fail_product(scenario, routing.path, pos[f])
        vals.append(0.0 if prod is None else 1.0 - prod)
    return min(vals)


def _paths(scenario: Scenario, k: int, paths: PathSets) -> list[Routing]:
    if paths is not None and k in paths:
        return list(paths[k])
    if k in scenario.routes and paths is None:
        return [scenario.routes[k]]
    d = scenario.demands[k]
    return [Routing(p) for p in enumerate_paths_oracle(scenario.network.graph, d.source, d.target)]


def _survival_side(scenario: Scenario, dep: Deployment, d: Demand, routes: list[Routing]) -> float:
    """min over NFs of max over routes of [1 - product of serving failure probabilities]."""
    worst = math.inf
    for f in d.nfs:
        best = 0.0
        for r in routes:
            prod = _fail_product(scenario, r.path, serving_positions(dep, d, r)[f])
            if prod is not None:
                best = max(best, 1.0 - prod)
        worst = min(worst, best)
    return worst


def _failure_side(scenario: Scenario, dep: Deployment, d: Demand, routes: list[Routing]) -> float:
    """max over NFs of min over routes of the product of serving failure probabilities."""
    worst = -math.inf
    for f in d.nfs:
        best = 1.0
        for r in routes:
            prod = _fail_product(scenario, r.path, serving_positions(dep, d, r)[f])
            if prod is not None:
                best = min(best, prod)
        worst = max(worst, best)
    return worst


def rp_demand(scenario: Scenario, deployment: Deployment, demand_index: int, paths: PathSets = None) -> float:
    """Robustness of one demand (chained demands divided by |F|!).

    ``paths`` maps demand index to candidate routings.  Without it the
    scenario's fixed route is used if present, else every simple path.
    """
    d = scenario.demands[demand_index]
    raw = _survival_side(scenario, deployment, d, _paths(scenario, demand_index, paths))
    return raw / d.factorial


def fp_demand(scenario: Scenario, deployment: Deployment, demand_index: int, paths: PathSets = None) -> float:
    """Failure-side value of one demand (no factorial division)."""
    d = scenario.demands[demand_index]
    return _failure_side(scenario, deployment, d, _paths(scenario, demand_index, paths))


@dataclass(frozen=True)
class MetricReport:
    per_demand_rp: dict[int, float]
    system_rp: float
    per_demand_fp: dict[int, float]
    system_fp: float
    diagnostics: tuple[str, ...] = field(default=())

    def dual_objective(self, demands: Sequence[Demand]) -> float:
        """Failure-side system value: max over demands of 1 - (1 - FP)/|F|!."""
        return max(1.0 - (1.0 - self.per_demand_fp[k]) / d.factorial for k, d in enumerate(demands))


def system_metrics(scenario: Scenario, deployment: Deployment, paths: PathSets = None) -> MetricReport:
    rp: dict[int, float] = {}
    fp: dict[int, float] = {}
    diag: list[str] = []
    for k, d in enumerate(scenario.demands):
        routes = _paths(scenario, k, paths)
        rp[k] = _survival_side(scenario, deployment, d, routes) / d.factorial
        fp[k] = _failure_side(scenario, deployment, d, routes)
        if rp[k] == 0.0:
            diag.append(f"demand {k} ({d.label}): some NF has no serving copy on any route")
    return MetricReport(rp, min(rp.values()), fp, max(fp.values()), tuple(diag))


def exact_reliability(
    scenario: Scenario, deployment: Deployment, demand: Demand, routing: Routing, guard: int = 2**20
) -> float:
    """Probability that the demand is fulfilled on ``routing`` (in order when chained).

    Enumerates alive/failed states of every host that may serve the demand.
    """
    pos = serving_positions(deployment, demand, routing)
    hosts = sorted({routing.path[j] for ps in pos.values() for j in ps}, key=node_key)
    if 2 ** len(hosts) > guard:
        raise ReliabilityGuardError(f"{2 ** len(hosts)} failure states exceed the guard {guard}")
    rho = [scenario.network.rho(i) for i in hosts]
    total = 0.0
    for alive_bits in itertools.product((False, True), repeat=len(hosts)):
        alive = {h for h, a in zip(hosts, alive_bits) if a}
        if _fulfilled(demand, routing.path, pos, alive):
            total += math.prod((1.0 - r) if a else r for r, a in zip(rho, alive_bits))
    return total


def _fulfilled(demand: Demand, path: Sequence[str], pos: Mapping[str, list[int]], alive: set[str]) -> bool:
    if not demand.ordered:
        return all(any(path[j] in alive for j in pos[f]) for f in demand.nfs)
    cur = 0
    for f in demand.nfs:
        nxt = [j for j in pos[f] if j >= cur and path[j] in alive]
        if not nxt:
            return False
        cur = nxt[0]
    return True


def all_deployments(scenario: Scenario) -> list[Deployment]:
    """Every placement respecting pools and per-NF limits (used by the duality check)."""
    cat = scenario.catalog
    nfs = sorted({f for d in scenario.demands for f in d.nfs})
    choices = []
    for f in nfs:
        pool = sorted(cat.pool[f], key=node_key)
        subsets = [c for r in range(0, min(cat.limit[f], len(pool)) + 1) for c in itertools.combinations(pool, r)]
        choices.append(subsets)
    return [Deployment.of(dict(zip(nfs, combo))) for combo in itertools.product(*choices)]


@dataclass(frozen=True)
class DualityReport:
    identity_ok: bool
    optimizers_ok: bool | None
    max_identity_gap: float
    rp_optimizers: tuple[int, ...] = ()
    fp_optimizers: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.optimizers_ok is not False


def _identity_gap(scenario: Scenario, dep: Deployment, paths: PathSets) -> tuple[float, MetricReport]:
    rep = system_metrics(scenario, dep, paths)
    gap = 0.0
    for k, d in enumerate(scenario.demands):
        gap = max(gap, abs(rep.per_demand_rp[k] * d.factorial - (1.0 - rep.per_demand_fp[k])))
    gap = max(gap, abs(rep.system_rp - (1.0 - rep.dual_objective(scenario.demands))))
    return gap, rep


def duality_report(
    scenario: Scenario,
    deployment: Deployment | None = None,
    paths: PathSets = None,
    deployments: Sequence[Deployment] | None = None,
) -> DualityReport:
    """Check RP/FP agreement for one deployment and, optionally, across many.

    Across deployments the RP maximizers must coincide with the minimizers
    of the failure-side objective (each computed on its own side).
    """
    gap = 0.0
    if deployment is not None:
        gap = _identity_gap(scenario, deployment, paths)[0]
    opt_ok: bool | None = None
    rp_opt: tuple[int, ...] = ()
    fp_opt: tuple[int, ...] = ()
    if deployments is not None:
        rps, fps = [], []
        for dep in deployments:
            g, rep = _identity_gap(scenario, dep, paths)
            gap = max(gap, g)
            rps.append(rep.system_rp)
            fps.append(rep.dual_objective(scenario.demands))
        best_rp, best_fp = max(rps), min(fps)
        rp_opt = tuple(i for i, v in enumerate(rps) if v >= best_rp - TOL)
        fp_opt = tuple(i for i, v in enumerate(fps) if v <= best_fp + TOL)
        opt_ok = rp_opt == fp_opt
    return DualityReport(gap <= TOL, opt_ok, gap, rp_opt, fp_opt)


def verify_duality(scenario: Scenario, deployment: Deployment, paths: PathSets = None, exhaustive: bool = False) -> bool:
    deps = all_deployments(scenario) if exhaustive else None
    return duality_report(scenario, deployment, paths, deps).ok
