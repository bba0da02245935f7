"""Robust NF provisioning models.

Variable families (index names map back through ``model.metadata``):

    lam                 objective value
    xi_f{a}_d{k}        log failure term of NF a for demand k
    x_d{k}_p{p}         demand k uses candidate route p
    y_f{a}_n{j}_d{k}    host j serves NF a for demand k
    h_n{j}              host j carries any NF
    z_f{a}_n{j}         NF a deployed on host j
    om_d{k}, bt_d{k}    chained models: per-demand value and selector

Rows are named ``c<family>_...``.  Two families extend the displayed model:
``ccov`` requires a serving copy of every requested NF (unordered demands)
and ``canc`` requires the anchor copies of the chosen route (chained
demands).
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Literal

from ..netmodel import Demand, Deployment, Routing, Scenario, node_key
from ..metrics import serving_positions
from ..pathfind import (
    NoServicePathError,
    k_shortest_candidate_paths,
    k_shortest_service_paths,
    service_aux,
    sfc_shortest_path,
)
from .model import MilpModel, ModelError

__all__ = [
    "DEFAULT_FLOOR",
    "LogMode",
    "ModelStructure",
    "build_nonchained_model",
    "build_sfc_model",
    "candidate_routings",
    "log_weight",
]

LogMode = Literal["paper", "faithful"]
DEFAULT_FLOOR = 1e-12


def log_weight(rho: float, mode: LogMode, floor: float = DEFAULT_FLOOR) -> float:
    """Per-copy log term: ln(1 + rho) in paper mode, ln(rho) (floored) in faithful mode."""
    if mode == "paper":
        return math.log1p(rho)
    if mode == "faithful":
        return math.log(max(rho, floor))
    raise ModelError(f"unknown log mode {mode!r}")


@dataclass(frozen=True)
class ModelStructure:
    """Index data the structured solver and solution extraction rely on."""

    kind: Literal["nonchained", "sfc"]
    mode: LogMode
    nodes: tuple[str, ...]
    nfs: tuple[str, ...]
    demand_nfs: tuple[frozenset[int], ...]
    log_n: tuple[float, ...]
    weights: tuple[float, ...]
    pools: tuple[frozenset[int], ...]
    limits: tuple[int, ...]
    routes: tuple[tuple[Routing, ...], ...]
    windows: Mapping[tuple[int, int, int], frozenset[int]]
    anchors: Mapping[tuple[int, int, int], int]
    big_m: float
    floor: float


def candidate_routings(scenario: Scenario, k: int = 10) -> dict[int, list[Routing]]:
    """k-shortest routes per demand.

    Chained demands use service paths of the aux network (so anchors respect
    the chain).  Unordered demands use physical k-shortest paths, plus the
    canonical service path when those miss some requested NF entirely.
    """
    out: dict[int, list[Routing]] = {}
    for idx, d in enumerate(scenario.demands):
        if d.ordered:
            try:
                aux = service_aux(scenario, d)
                paths = k_shortest_service_paths(aux, d.source, d.target, k)
            except (NoServicePathError, ValueError):
                paths = []
            out[idx] = [p.routing() for p in paths]
            continue
        routes = [Routing(p) for p in k_shortest_candidate_paths(scenario.network, d.source, d.target, k)]
        cat = scenario.catalog
        on_some = {f for f in d.nfs for r in routes if cat.pool[f] & set(r.path)}
        if on_some != set(d.nfs):
            try:
                sp = sfc_shortest_path(service_aux(scenario, d), d.source, d.target)
                extra = Routing(sp.physical)
                if extra not in routes:
                    routes.append(extra)
            except (NoServicePathError, ValueError):
                pass
        out[idx] = routes
    return out


def _structure(
    scenario: Scenario, candidates: Mapping[int, Sequence[Routing]], mode: LogMode, kind: str, floor: float
) -> ModelStructure:
    net, cat = scenario.network, scenario.catalog
    nodes = net.node_ids
    pos = {n: j for j, n in enumerate(nodes)}
    nfs = tuple(sorted({f for d in scenario.demands for f in d.nfs}))
    fidx = {f: a for a, f in enumerate(nfs)}
    pools = tuple(frozenset(pos[i] for i in cat.pool[f]) for f in nfs)
    full = Deployment.of({f: cat.pool[f] for f in nfs})
    routes, windows, anchors = [], {}, {}
    for k, d in enumerate(scenario.demands):
        rs = tuple(candidates.get(k, ()))
        if not rs:
            raise ModelError(f"demand {k} ({d.label}) has no candidate route")
        if kind == "sfc":
            ok = tuple(r for r in rs if _respects_chain(scenario, d, r))
            if not ok:
                raise ModelError(f"demand {k} ({d.label}) has no route respecting its chain")
            rs = ok
        routes.append(rs)
        for p, r in enumerate(rs):
            serv = serving_positions(full, d, r)
            for f in d.nfs:
                windows[(k, p, fidx[f])] = frozenset(pos[r.path[j]] for j in serv[f])
            for f, at in r.anchors:
                anchors[(k, p, fidx[f])] = pos[r.path[at]]
    weights = tuple(log_weight(net.rho(i), mode, floor) for i in nodes)
    log_n = tuple(math.log(math.factorial(len(d.nfs))) if kind == "sfc" else 0.0 for d in scenario.demands)
    big_m = 1.0 + sum(abs(w) for w in weights) + max(log_n, default=0.0)
    return ModelStructure(
        kind=kind,  # type: ignore[arg-type]
        mode=mode,
        nodes=nodes,
        nfs=nfs,
        demand_nfs=tuple(frozenset(fidx[f] for f in d.nfs) for d in scenario.demands),
        log_n=log_n,
        weights=weights,
        pools=pools,
        limits=tuple(cat.limit[f] for f in nfs),
        routes=tuple(routes),
        windows=windows,
        anchors=anchors,
        big_m=big_m,
        floor=floor,
    )


def _respects_chain(scenario: Scenario, d: Demand, r: Routing) -> bool:
    if not r.anchors or tuple(f for f, _ in r.anchors) != d.nfs:
        return False
    at = [p for _, p in r.anchors]
    if at != sorted(at) or r.path[0] != d.source or r.path[-1] != d.target:
        return False
    return all(r.path[p] in scenario.catalog.pool[f] for f, p in r.anchors)


def _common(st: ModelStructure, name: str) -> MilpModel:
    m = MilpModel(name)
    free = st.mode == "faithful"
    lo = -math.inf if free else 0.0
    m.add_var("lam", lo)
    m.objective = {"lam": 1.0}
    nD, nF = len(st.routes), len(st.nfs)
    for a in range(nF):
        for k in range(nD):
            m.add_var(f"xi_f{a}_d{k}", lo)
    for k, rs in enumerate(st.routes):
        for p in range(len(rs)):
            m.add_binary(f"x_d{k}_p{p}")
    for a in range(nF):
        for j in sorted(st.pools[a]):
            for k in range(nD):
                m.add_binary(f"y_f{a}_n{j}_d{k}", implied=True)
    hosts = sorted(set().union(*st.pools)) if st.pools else []
    for j in hosts:
        m.add_binary(f"h_n{j}", implied=True)
    for a in range(nF):
        for j in sorted(st.pools[a]):
            m.add_binary(f"z_f{a}_n{j}")

    # (5) node budget
    for a in range(nF):
        m.add_constraint(f"c5_f{a}", {f"h_n{j}": 1.0 for j in hosts}, "<=", st.limits[a])
    # (7) failure term of each (NF, demand)
    for a in range(nF):
        for k in range(nD):
            row = {f"xi_f{a}_d{k}": 1.0}
            for j in sorted(st.pools[a]):
                row[f"y_f{a}_n{j}_d{k}"] = -st.weights[j]
            m.add_constraint(f"c7_f{a}_d{k}", row, "=", 0.0)
    for a in range(nF):
        for j in sorted(st.pools[a]):
            for k, rs in enumerate(st.routes):
                gamma = 1.0 if a in st.demand_nfs[k] else 0.0
                y, z = f"y_f{a}_n{j}_d{k}", f"z_f{a}_n{j}"
                delta = [1.0 if j in st.windows.get((k, p, a), ()) else 0.0 for p in range(len(rs))]
                # (8) deployed copy on the chosen route must serve
                for p in range(len(rs)):
                    m.add_constraint(f"c8_f{a}_n{j}_d{k}_p{p}", [(y, 1.0), (z, -1.0), (f"x_d{k}_p{p}", -delta[p])], ">=", gamma - 2.0)
                # (9)-(11) upper bounds
                m.add_constraint(f"c9_f{a}_n{j}_d{k}", [(y, 1.0), (z, -1.0)], "<=", 0.0)
                m.add_constraint(
                    f"c10_f{a}_n{j}_d{k}", [(y, 1.0)] + [(f"x_d{k}_p{p}", -delta[p]) for p in range(len(rs))], "<=", 0.0
                )
                m.add_constraint(f"c11_f{a}_n{j}_d{k}", [(y, 1.0)], "<=", gamma)
    # (12) host indicator
    for a in range(nF):
        for j in sorted(st.pools[a]):
            m.add_constraint(f"c12_f{a}_n{j}", [(f"h_n{j}", 1.0), (f"z_f{a}_n{j}", -1.0)], ">=", 0.0)
    # (13) one route per demand
    for k, rs in enumerate(st.routes):
        m.add_constraint(f"c13_d{k}", {f"x_d{k}_p{p}": 1.0 for p in range(len(rs))}, "=", 1.0)
    return m


def build_nonchained_model(
    scenario: Scenario, candidates: Mapping[int, Sequence[Routing]], log_mode: LogMode = "paper", floor: float = DEFAULT_FLOOR
) -> MilpModel:
    """Minimize the worst (NF, demand) log failure term over placements and routes."""
    st = _structure(scenario, candidates, log_mode, "nonchained", floor)
    m = _common(st, "robust_nonchained")
    for k in range(len(st.routes)):
        for a in sorted(st.demand_nfs[k]):
            # (6) objective dominates every requested term
            m.add_constraint(f"c6_f{a}_d{k}", [("lam", 1.0), (f"xi_f{a}_d{k}", -1.0)], ">=", 0.0)
            m.add_constraint(f"ccov_f{a}_d{k}", {f"y_f{a}_n{j}_d{k}": 1.0 for j in sorted(st.pools[a])}, ">=", 1.0)
    m.metadata.update(structure=st, big_m=st.big_m, kind="nonchained", log_mode=log_mode)
    return m


def build_sfc_model(
    scenario: Scenario, candidates: Mapping[int, Sequence[Routing]], log_mode: LogMode = "paper", floor: float = DEFAULT_FLOOR
) -> MilpModel:
    """Chained variant: per-demand values offset by ln|F|!, linked to the objective by big-M."""
    for d in scenario.demands:
        if not d.ordered:
            raise ModelError(f"demand {d.label} is unordered; the chained model needs ordered demands")
    st = _structure(scenario, candidates, log_mode, "sfc", floor)
    m = _common(st, "robust_sfc")
    lo = -math.inf if log_mode == "faithful" else 0.0
    nD = len(st.routes)
    for k in range(nD):
        m.add_var(f"om_d{k}", lo)
    for k in range(nD):
        m.add_binary(f"bt_d{k}", implied=True)
    M = st.big_m
    for k in range(nD):
        m.add_constraint(f"c15_d{k}", [("lam", 1.0), (f"om_d{k}", -1.0)], ">=", 0.0)
        for a in sorted(st.demand_nfs[k]):
            m.add_constraint(f"c16_f{a}_d{k}", [(f"om_d{k}", 1.0), (f"xi_f{a}_d{k}", -1.0)], ">=", -st.log_n[k])
    m.add_constraint("c17", {f"bt_d{k}": 1.0 for k in range(nD)}, "=", 1.0)
    for k in range(nD):
        m.add_constraint(f"c18_d{k}", [("lam", 1.0), (f"om_d{k}", -1.0), (f"bt_d{k}", M)], "<=", M)
        m.add_constraint(f"c19_d{k}", [("lam", 1.0), (f"om_d{k}", -1.0), (f"bt_d{k}", -M)], ">=", -M)
    for k, rs in enumerate(st.routes):
        for p in range(len(rs)):
            for a in sorted(st.demand_nfs[k]):
                j = st.anchors[(k, p, a)]
                m.add_constraint(f"canc_f{a}_d{k}_p{p}", [(f"z_f{a}_n{j}", 1.0), (f"x_d{k}_p{p}", -1.0)], ">=", 0.0)
    m.metadata.update(structure=st, big_m=M, kind="sfc", log_mode=log_mode)
    return m


def node_name(st: ModelStructure, j: int) -> str:
    return st.nodes[j]


def sorted_nodes(nodes) -> list[str]:
    return sorted(nodes, key=node_key)
