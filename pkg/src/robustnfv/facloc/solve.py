"""SFC-Fork placement: greedy pipeline, exact oracle and lemma checks."""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from ..netmodel import node_key
from .greedy import brute_force_1fl, greedy_1fl
from .instance import FLSolution, ForkInstance, ForkSolution, InfeasibleForkError
from .reduction import DEFAULT_CAP, DEFAULT_K, Reduction, two_step_reduction

__all__ = [
    "DEFAULT_DELTA",
    "LemmaReport",
    "SForkTrace",
    "bifactors",
    "brute_force_sfork",
    "check_lemma_inequalities",
    "forest_merge",
    "lift_solution",
    "reroute",
    "solve_sfork",
]

DEFAULT_DELTA = 8.67
GAMMA_F = 1.11
GAMMA_C = 1.78
_TOL = 1e-9


def bifactors(delta: float) -> tuple[float, float]:
    """(facility, connection) factors of the scaled greedy."""
    return GAMMA_F + math.log(delta), 1.0 + (GAMMA_C - 1.0) / delta


def lift_solution(red: Reduction, fl: FLSolution) -> ForkSolution:
    """Each request takes its facility's shared sequence plus its chosen disjoint tail."""
    paths = []
    for k, q in enumerate(fl.assign):
        shared = red.facilities[q]
        paths.append(shared + red.tails[(k, shared[-1])])
    return ForkSolution(red.fork, tuple(paths))


def _cheapest(fork: ForkInstance, k: int, allowed: Mapping[str, Sequence[str]]) -> tuple[str, ...] | None:
    """Cheapest host sequence for request k using only ``allowed`` hosts per NF."""
    r, chain = fork.requests[k], fork.chain(k)
    layer = {i: (fork.d(r.source, i), (i,)) for i in allowed.get(chain[0], ())}
    for f in chain[1:]:
        nxt = {}
        for j in allowed.get(f, ()):
            opts = [(c + fork.d(i, j), p + (j,)) for i, (c, p) in layer.items()]
            if opts:
                nxt[j] = min(opts, key=lambda cp: (cp[0], tuple(node_key(x) for x in cp[1])))
        layer = nxt
    done = [(c + fork.d(p[-1], r.target), p) for c, p in layer.values()]
    done = [cp for cp in done if math.isfinite(cp[0])]
    if not done:
        return None
    return min(done, key=lambda cp: (cp[0], tuple(node_key(x) for x in cp[1])))[1]


def reroute(sol: ForkSolution) -> ForkSolution:
    """Re-serve every request over the copies already deployed, then drop unused ones."""
    allowed: dict[str, list[str]] = {}
    for i, f in sol.copies:
        allowed.setdefault(f, []).append(i)
    paths = []
    for k, old in enumerate(sol.paths):
        new = _cheapest(sol.fork, k, allowed)
        paths.append(new if new is not None and sol.request_cost(k) > _cost_of(sol.fork, k, new) else old)
    return sol.with_paths(paths)


def _cost_of(fork: ForkInstance, k: int, p: Sequence[str]) -> float:
    r = fork.requests[k]
    return fork.d(r.source, p[0]) + fork.walk_cost(p) + fork.d(p[-1], r.target)


def forest_merge(sol: ForkSolution) -> ForkSolution:
    """Make service paths agree below every shared host, deepest level first.

    Requests meeting at a (level, NF, host) all adopt one of their current
    prefixes, the one giving the cheapest solution.  No new copy is ever
    introduced and the last host of each request is untouched.
    """
    paths = [list(p) for p in sol.paths]
    fork = sol.fork
    depth = max(len(p) for p in paths) if paths else 0
    for lvl in range(depth - 1, 0, -1):
        groups: dict[tuple[str, str], list[int]] = {}
        for k, p in enumerate(paths):
            if lvl < len(p):
                groups.setdefault((fork.chain(k)[lvl], p[lvl]), []).append(k)
        for key in sorted(groups, key=lambda g: (g[0], node_key(g[1]))):
            members = groups[key]
            prefixes = sorted({tuple(paths[k][:lvl]) for k in members}, key=lambda p: tuple(node_key(x) for x in p))
            if len(prefixes) < 2:
                continue
            best, best_val = None, math.inf
            for pre in prefixes:
                trial = [list(pre) + p[lvl:] if k in members else p for k, p in enumerate(paths)]
                val = sol.with_paths(trial).total
                if val < best_val - _TOL:
                    best, best_val = pre, val
            for k in members:
                paths[k] = list(best) + paths[k][lvl:]
    return sol.with_paths(paths)


@dataclass(frozen=True)
class SForkTrace:
    reduction: Reduction = field(repr=False)
    fl: FLSolution = field(repr=False)
    lifted: ForkSolution
    final: ForkSolution


def solve_sfork(
    fork: ForkInstance, delta: float = DEFAULT_DELTA, cap: int = DEFAULT_CAP, k: int = DEFAULT_K
) -> SForkTrace:
    """Reduce, run the scaled greedy, lift, then tidy into a forest."""
    alpha, beta = bifactors(delta)
    red = two_step_reduction(fork, alpha, beta, cap, k)
    fl = greedy_1fl(red.instance, delta)
    lifted = lift_solution(red, fl)
    tidy = forest_merge(reroute(lifted))
    final = tidy if tidy.total <= forest_merge(lifted).total else forest_merge(lifted)
    return SForkTrace(red, fl, lifted, final)


def brute_force_sfork(fork: ForkInstance, guard: int = 200_000) -> ForkSolution:
    """Exact optimum: every nonempty host subset per NF, cheapest routing per request."""
    nfs = list(fork.shared) + [f for b in fork.branches for f in b]
    choices = []
    size = 1
    for f in nfs:
        pool = list(fork.pools[f])
        size *= 2 ** len(pool) - 1
        if size > guard:
            raise RuntimeError(f"more than {guard} deployments to enumerate")
        choices.append([c for r in range(1, len(pool) + 1) for c in itertools.combinations(pool, r)])
    best, best_val = None, math.inf
    for combo in itertools.product(*choices):
        allowed = dict(zip(nfs, combo))
        opened = sum(fork.cost(i, f) for f, hosts in allowed.items() for i in hosts)
        if opened >= best_val:
            continue
        paths = []
        total = opened
        for k in range(len(fork.requests)):
            p = _cheapest(fork, k, allowed)
            if p is None:
                total = math.inf
                break
            paths.append(p)
            total += _cost_of(fork, k, p)
            if total >= best_val - _TOL:
                break
        if total < best_val - _TOL:
            best, best_val = paths, total
    if best is None:
        raise InfeasibleForkError("no feasible placement")
    return ForkSolution(fork, tuple(tuple(p) for p in best))


@dataclass
class LemmaReport:
    checked: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def expect(self, cond: bool, msg: str) -> None:
        self.checked += 1
        if not cond:
            self.violations.append(msg)


def check_lemma_inequalities(
    traces: Sequence[SForkTrace], others: Sequence[ForkSolution] = (), fl_guard: int = 2**16
) -> LemmaReport:
    """Cost inequalities linking reduced and lifted solutions.

    (a) lifting never costs more than the facility-location solution;
    (b) merging to a forest keeps or lowers deployment cost, keeps the
        last-leg connection cost and yields a forest;
    (c) the best facility-location solution under weights (alpha, beta) costs
        at most alpha*O + 3*beta*C of any placement of the same fork.
    """
    rep = LemmaReport()
    for n, tr in enumerate(traces):
        lifted = tr.lifted
        rep.expect(
            lifted.O + lifted.C <= tr.fl.facility_cost + tr.fl.connection_cost + _TOL,
            f"trace {n}: lifted cost {lifted.O + lifted.C} exceeds reduced cost {tr.fl.total}",
        )
        for label, chi in (("lifted", lifted), ("rerouted", reroute(lifted))):
            psi = forest_merge(chi)
            rep.expect(psi.O <= chi.O + _TOL, f"trace {n}: merge of {label} raised deployment cost")
            rep.expect(abs(psi.C_last - chi.C_last) <= _TOL, f"trace {n}: merge of {label} changed last-leg cost")
            rep.expect(psi.is_forest(), f"trace {n}: merge of {label} is not a forest")
        rep.expect(tr.final.is_forest(), f"trace {n}: final solution is not a forest")
        red = tr.reduction
        if 2 ** len(red.instance.facilities) <= fl_guard:
            best = brute_force_1fl(red.instance, red.alpha, red.beta, guard=fl_guard)
            lhs = best.weighted(red.alpha, red.beta)
            for label, psi in [("lifted", lifted), ("final", tr.final)] + [(f"other{m}", o) for m, o in enumerate(others)]:
                if psi.fork is not tr.final.fork:
                    continue
                rhs = red.alpha * psi.O + 3 * red.beta * psi.C
                rep.expect(lhs <= rhs + _TOL, f"trace {n}: reduced optimum {lhs} exceeds alpha*O + 3*beta*C = {rhs} for {label}")
    return rep
