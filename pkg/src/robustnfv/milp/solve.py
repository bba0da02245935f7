"""Exact solution of the provisioning models at desk scale.

Primary strategy (models built by this package): enumerate placements and
resolve everything else in closed form.  Once placement z and route choice x
are fixed, every other variable is determined: y is 1 exactly for deployed
copies serving on the chosen route, xi sums their weights and the objective
is the worst demand value.  Route choice then decouples per demand.  In
faithful mode weights are nonpositive, so extra copies never hurt and only
maximal host sets need to be enumerated.

Fallback: depth-first branch and bound on the placement/route binaries with
LP relaxation bounds.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from ..metrics import MetricReport, serving_positions, system_metrics
from ..netmodel import Deployment, Routing, Scenario
from .build import ModelStructure, log_weight
from .model import MilpModel

__all__ = [
    "DEFAULT_GUARD",
    "InternalConsistencyError",
    "SolveResult",
    "branch_and_bound",
    "extract_solution",
    "recompute_objective",
    "solve_exact",
]

DEFAULT_GUARD = 40
DEFAULT_ENUM_GUARD = 2_000_000
_TOL = 1e-9

Status = Literal["optimal", "infeasible", "guard-exceeded"]


class InternalConsistencyError(RuntimeError):
    pass


@dataclass
class SolveResult:
    status: Status
    objective: float = math.nan
    values: dict[str, float] = field(default_factory=dict)
    deployment: Deployment | None = None
    routing: dict[int, Routing] = field(default_factory=dict)
    method: str = ""
    message: str = ""


# --------------------------------------------------------------------------
# structured enumeration


def _pairs(st: ModelStructure) -> list[tuple[int, int]]:
    return [(a, j) for a in range(len(st.nfs)) for j in sorted(st.pools[a])]


def _node_budget(st: ModelStructure) -> int:
    return min(st.limits) if st.limits else 0


def _placements(st: ModelStructure) -> tuple[int, Iterator[np.ndarray]]:
    """Candidate placements as 0/1 rows over (NF, host) pairs."""
    pairs = _pairs(st)
    hosts = sorted(set().union(*st.pools)) if st.pools else []
    n_budget = _node_budget(st)
    if st.mode == "faithful":
        size = min(n_budget, len(hosts))
        count = math.comb(len(hosts), size)

        def gen() -> Iterator[np.ndarray]:
            for hs in itertools.combinations(hosts, size):
                s = set(hs)
                yield np.array([1.0 if j in s else 0.0 for _, j in pairs])

        return count, gen()
    per_nf = []
    count = 1
    for a in range(len(st.nfs)):
        pool = sorted(st.pools[a])
        subs = [c for r in range(len(pool) + 1) for c in itertools.combinations(pool, r)]
        per_nf.append(subs)
        count *= len(subs)

    def gen_all() -> Iterator[np.ndarray]:
        for combo in itertools.product(*per_nf):
            used = set().union(*map(set, combo)) if combo else set()
            if len(used) > n_budget:
                continue
            chosen = {(a, j) for a, sub in enumerate(combo) for j in sub}
            yield np.array([1.0 if pr in chosen else 0.0 for pr in pairs])

    return count, gen_all()


@dataclass
class _Tables:
    cols: list[tuple[int, int, int]]  # (demand, route, nf) per column
    A: np.ndarray  # weights of serving copies
    B: np.ndarray  # serving indicator
    K: np.ndarray  # anchor indicator (chained models)


def _tables(st: ModelStructure) -> _Tables:
    pairs = _pairs(st)
    cols = [(k, p, a) for k, rs in enumerate(st.routes) for p in range(len(rs)) for a in sorted(st.demand_nfs[k])]
    A = np.zeros((len(pairs), len(cols)))
    B = np.zeros_like(A)
    K = np.zeros_like(A)
    for q, (a, j) in enumerate(pairs):
        for c, (k, p, fa) in enumerate(cols):
            if fa != a:
                continue
            if j in st.windows.get((k, p, a), ()):
                A[q, c] = st.weights[j]
                B[q, c] = 1.0
            if st.anchors.get((k, p, a)) == j:
                K[q, c] = 1.0
    return _Tables(cols, A, B, K)


def _evaluate(st: ModelStructure, tb: _Tables, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Objective per placement row and the chosen route per demand."""
    vals = Z @ tb.A
    if st.kind == "sfc":
        ok = (Z @ tb.K) >= 1.0 - 1e-9
    else:
        ok = (Z @ tb.B) >= 1.0 - 1e-9
    nS = Z.shape[0]
    nD = len(st.routes)
    obj = np.full(nS, -np.inf)
    choice = np.zeros((nS, nD), dtype=int)
    col = 0
    for k, rs in enumerate(st.routes):
        nf = len(st.demand_nfs[k])
        P = len(rs)
        block = vals[:, col : col + P * nf].reshape(nS, P, nf)
        okb = ok[:, col : col + P * nf].reshape(nS, P, nf).all(axis=2)
        col += P * nf
        per_route = block.max(axis=2) - st.log_n[k]
        if st.kind == "sfc" and st.mode == "paper":
            per_route = np.maximum(per_route, 0.0)
        per_route = np.where(okb, per_route, np.inf)
        best = per_route.argmin(axis=1)
        choice[:, k] = best
        obj = np.maximum(obj, per_route[np.arange(nS), best])
    if st.mode == "paper":
        obj = np.maximum(obj, 0.0)
    return obj, choice


def _structured(model: MilpModel, st: ModelStructure, enum_guard: int) -> SolveResult | None:
    count, rows = _placements(st)
    if count > enum_guard:
        return None
    tb = _tables(st)
    best_val, best_z, best_choice = math.inf, None, None
    chunk: list[np.ndarray] = []

    def flush() -> None:
        nonlocal best_val, best_z, best_choice
        if not chunk:
            return
        Z = np.vstack(chunk)
        obj, choice = _evaluate(st, tb, Z)
        i = int(np.argmin(obj))
        if obj[i] < best_val - 1e-12:
            best_val, best_z, best_choice = float(obj[i]), Z[i].copy(), choice[i].copy()
        chunk.clear()

    for z in rows:
        chunk.append(z)
        if len(chunk) >= 4096:
            flush()
    flush()
    if best_z is None or not math.isfinite(best_val):
        return SolveResult("infeasible", method="enumeration", message="no placement serves every demand")
    values = _complete(model, st, best_z, best_choice)
    return _finish(model, st, values, "enumeration")


def _complete(model: MilpModel, st: ModelStructure, zrow: np.ndarray, choice: np.ndarray) -> dict[str, float]:
    """Closed-form values of every variable from placement and route choice."""
    values = {name: 0.0 for name in model.variables}
    pairs = _pairs(st)
    z = {pr: float(v) for pr, v in zip(pairs, zrow)}
    for (a, j), v in z.items():
        values[f"z_f{a}_n{j}"] = v
        if v:
            values[f"h_n{j}"] = 1.0
    omega = []
    for k, rs in enumerate(st.routes):
        p = int(choice[k])
        values[f"x_d{k}_p{p}"] = 1.0
        xis = []
        for a in range(len(st.nfs)):
            xi = 0.0
            if a in st.demand_nfs[k]:
                for j in sorted(st.windows.get((k, p, a), ())):
                    if z.get((a, j)):
                        values[f"y_f{a}_n{j}_d{k}"] = 1.0
                        xi += st.weights[j]
                xis.append(xi)
            values[f"xi_f{a}_d{k}"] = xi
        om = max(xis) - st.log_n[k]
        if st.kind == "sfc" and st.mode == "paper":
            om = max(om, 0.0)
        omega.append(om)
    lam = max(omega)
    if st.mode == "paper":
        lam = max(lam, 0.0)
    values["lam"] = lam
    if st.kind == "sfc":
        star = max(range(len(omega)), key=lambda k: (omega[k], -k))
        for k, om in enumerate(omega):
            values[f"om_d{k}"] = om
            values[f"bt_d{k}"] = 1.0 if k == star else 0.0
    return values


def _finish(model: MilpModel, st: ModelStructure | None, values: dict[str, float], method: str) -> SolveResult:
    bad = model.violations(values, tol=1e-7)
    if bad:
        raise InternalConsistencyError(f"{method} produced an infeasible point: {bad[:5]}")
    res = SolveResult("optimal", model.objective_value(values), values, method=method)
    if st is not None:
        placement: dict[str, set[str]] = {f: set() for f in st.nfs}
        for a, j in _pairs(st):
            if values[f"z_f{a}_n{j}"] > 0.5:
                placement[st.nfs[a]].add(st.nodes[j])
        res.deployment = Deployment.of(placement)
        for k, rs in enumerate(st.routes):
            for p, r in enumerate(rs):
                if values[f"x_d{k}_p{p}"] > 0.5:
                    res.routing[k] = r
    return res


# --------------------------------------------------------------------------
# generic branch and bound


@dataclass
class _Matrices:
    names: list[str]
    c: np.ndarray
    A_ub: sparse.csr_matrix | None
    b_ub: np.ndarray
    A_eq: sparse.csr_matrix | None
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray


def _matrices(model: MilpModel) -> _Matrices:
    names = list(model.variables)
    idx = {n: i for i, n in enumerate(names)}
    c = np.zeros(len(names))
    for v, w in model.objective.items():
        c[idx[v]] = w if model.sense == "min" else -w
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for con in model.constraints:
        row = {idx[v]: w for v, w in con.coeffs}
        if con.sense == "<=":
            ub_rows.append(row)
            ub_rhs.append(con.rhs)
        elif con.sense == ">=":
            ub_rows.append({i: -w for i, w in row.items()})
            ub_rhs.append(-con.rhs)
        else:
            eq_rows.append(row)
            eq_rhs.append(con.rhs)

    def mat(rows: list[dict[int, float]]) -> sparse.csr_matrix | None:
        if not rows:
            return None
        data, ri, ci = [], [], []
        for r, row in enumerate(rows):
            for i, w in row.items():
                ri.append(r)
                ci.append(i)
                data.append(w)
        return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), len(names)))

    lb = np.array([model.variables[n].lb for n in names])
    ub = np.array([model.variables[n].ub for n in names])
    return _Matrices(names, c, mat(ub_rows), np.array(ub_rhs), mat(eq_rows), np.array(eq_rhs), lb, ub)


def branch_and_bound(model: MilpModel, guard: int = DEFAULT_GUARD) -> SolveResult:
    """Depth-first search over integer variables with LP bounds (HiGHS via SciPy)."""
    branch = [v.name for v in model.variables.values() if v.integer and not v.implied]
    if len(branch) > guard:
        return SolveResult("guard-exceeded", message=f"{len(branch)} branching binaries exceed the guard {guard}; export the LP and use an external solver")
    mats = _matrices(model)
    pos = {n: i for i, n in enumerate(mats.names)}
    integer = [pos[v.name] for v in model.variables.values() if v.integer]
    primary = set(pos[n] for n in branch)
    best_val, best_x = math.inf, None
    stack = [(mats.lb.copy(), mats.ub.copy())]
    nodes = 0
    while stack:
        lb, ub = stack.pop()
        nodes += 1
        res = linprog(
            mats.c, A_ub=mats.A_ub, b_ub=mats.b_ub if mats.A_ub is not None else None,
            A_eq=mats.A_eq, b_eq=mats.b_eq if mats.A_eq is not None else None,
            bounds=list(zip([None if math.isinf(x) else x for x in lb], [None if math.isinf(x) else x for x in ub])),
            method="highs",
        )
        if res.status != 0 or res.fun >= best_val - 1e-9:
            continue
        x = res.x
        frac = [i for i in integer if abs(x[i] - round(x[i])) > 1e-7]
        if not frac:
            best_val, best_x = float(res.fun), x.copy()
            continue
        pick = min(frac, key=lambda i: (i not in primary, -min(x[i] - math.floor(x[i]), math.ceil(x[i]) - x[i]), i))
        lo_b, hi_b = (lb.copy(), ub.copy()), (lb.copy(), ub.copy())
        lo_b[1][pick] = math.floor(x[pick])
        hi_b[0][pick] = math.ceil(x[pick])
        # explore the rounded-nearest side first
        if x[pick] - math.floor(x[pick]) >= 0.5:
            stack += [lo_b, hi_b]
        else:
            stack += [hi_b, lo_b]
    if best_x is None:
        return SolveResult("infeasible", method="branch-and-bound", message=f"{nodes} nodes explored")
    values = {n: float(best_x[i]) for i, n in enumerate(mats.names)}
    for i in integer:
        values[mats.names[i]] = float(round(values[mats.names[i]]))
    st = model.metadata.get("structure")
    if isinstance(st, ModelStructure):
        # integral z and x pin every other variable; recompute exactly
        zrow = np.array([values[f"z_f{a}_n{j}"] for a, j in _pairs(st)])
        choice = np.array([next(p for p in range(len(rs)) if values[f"x_d{k}_p{p}"] > 0.5) for k, rs in enumerate(st.routes)])
        values = _complete(model, st, zrow, choice)
    res = _finish(model, st if isinstance(st, ModelStructure) else None, values, "branch-and-bound")
    res.message = f"{nodes} nodes explored"
    return res


def solve_exact(
    model: MilpModel, guard: int = DEFAULT_GUARD, enum_guard: int = DEFAULT_ENUM_GUARD, method: str = "auto"
) -> SolveResult:
    """Provably optimal solution, or a guard/infeasibility status."""
    st = model.metadata.get("structure")
    if method in ("auto", "enumeration") and isinstance(st, ModelStructure):
        res = _structured(model, st, enum_guard)
        if res is not None:
            return res
        if method == "enumeration":
            return SolveResult("guard-exceeded", message="placement enumeration exceeds its guard")
    return branch_and_bound(model, guard)


# --------------------------------------------------------------------------
# extraction


def recompute_objective(
    scenario: Scenario, deployment: Deployment, routing: Mapping[int, Routing], st: ModelStructure
) -> float:
    """Linearized objective of a placement and routing, evaluated from scratch."""
    worst = -math.inf
    for k, d in enumerate(scenario.demands):
        r = routing[k]
        pos = serving_positions(deployment, d, r)
        terms = []
        for f in d.nfs:
            hosts = {r.path[j] for j in pos[f]}
            terms.append(sum(log_weight(scenario.network.rho(i), st.mode, st.floor) for i in hosts))
        val = max(terms) - st.log_n[k]
        if st.kind == "sfc" and st.mode == "paper":
            val = max(val, 0.0)
        worst = max(worst, val)
    if st.mode == "paper":
        worst = max(worst, 0.0)
    return worst


def extract_solution(result: SolveResult, scenario: Scenario, model: MilpModel) -> tuple[Deployment, dict[int, Routing], MetricReport]:
    if result.status != "optimal" or result.deployment is None:
        raise ValueError(f"cannot extract from a {result.status} result")
    st = model.metadata["structure"]
    dep, routing = result.deployment, dict(result.routing)
    again = recompute_objective(scenario, dep, routing, st)
    if abs(again - result.objective) > _TOL * max(1.0, abs(again)):
        raise InternalConsistencyError(f"model objective {result.objective} disagrees with recomputed value {again}")
    report = system_metrics(scenario, dep, {k: [r] for k, r in routing.items()})
    return dep, routing, report
