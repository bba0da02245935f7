"""Reduction of SFC-Fork placement to 1-level facility location.

Facilities are shared host sequences over the levels up to the branching
NF; clients are requests.  A client pays to reach the facility's first host,
the facility's internal distance, and the cheapest way on from its last host:
a disjoint host sequence through the client's branch (deployment plus
connection cost) and on to the target.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import networkx as nx

from ..netmodel import node_key
from .instance import FacLocInstance, ForkInstance, InfeasibleForkError

__all__ = ["Reduction", "convert_requests", "level_paths", "reduce_1sfc", "two_step_reduction"]

DEFAULT_CAP = 100_000
DEFAULT_K = 50


def _lex(nodes: Sequence[str]) -> tuple:
    return tuple(node_key(n) for n in nodes)


def level_paths(fork: ForkInstance, nfs: Sequence[str], cap: int = DEFAULT_CAP, k: int = DEFAULT_K) -> list[tuple[str, ...]]:
    """Host sequences through ``nfs``: all of them, or the ``k`` cheapest per endpoint pair."""
    pools = [fork.pools[f] for f in nfs]
    if not nfs:
        return [()]
    if math.prod(len(p) for p in pools) <= cap:
        return [seq for seq in itertools.product(*pools) if math.isfinite(fork.walk_cost(seq))]
    # layered DAG: arc weight = distance plus the head copy's deployment cost
    g = nx.DiGraph()
    for lvl in range(len(nfs) - 1):
        for a in pools[lvl]:
            for b in pools[lvl + 1]:
                w = fork.d(a, b)
                if math.isfinite(w):
                    g.add_edge((lvl, a), (lvl + 1, b), weight=w + fork.cost(b, nfs[lvl + 1]))
    out = []
    for a in pools[0]:
        for b in pools[-1]:
            src, dst = (0, a), (len(nfs) - 1, b)
            if src not in g or dst not in g or not nx.has_path(g, src, dst):
                continue
            for p in itertools.islice(nx.shortest_simple_paths(g, src, dst, weight="weight"), k):
                out.append(tuple(n for _, n in p))
    return out


@dataclass(frozen=True)
class Reduction:
    fork: ForkInstance = field(repr=False)
    alpha: float
    beta: float
    instance: FacLocInstance
    facilities: tuple[tuple[str, ...], ...]
    tails: dict[tuple[int, str], tuple[str, ...]] = field(repr=False)


def _best(cands: Sequence[tuple[str, ...]], value) -> tuple[str, ...]:
    return min(cands, key=lambda p: (value(p), _lex(p)))


def convert_requests(fork: ForkInstance) -> dict[tuple[int, str, str], float]:
    """C(d, first host, last host) = d(s, first) + d(last, t) for every request."""
    table: dict[tuple[int, str, str], float] = {}
    for k, r in enumerate(fork.requests):
        chain = fork.chain(k)
        for a in fork.pools[chain[0]]:
            for b in fork.pools[chain[-1]]:
                val = fork.d(r.source, a) + fork.d(b, r.target)
                if math.isfinite(val):
                    table[(k, a, b)] = val
        if not any(key[0] == k for key in table):
            raise InfeasibleForkError(f"request {k}: endpoints cannot reach the first or last level")
    return table


def _assemble(fork: ForkInstance, alpha: float, beta: float, shared: list[tuple[str, ...]], client_cost) -> Reduction:
    """Facilities q(j, v, w) = argmin alpha*O(q) + j*beta*C(q) for j = 1..|D|.

    ``client_cost(k, q)`` returns request k's connection cost through q and
    the disjoint host sequence it continues with.
    """
    nd = len(fork.requests)
    if not shared:
        raise InfeasibleForkError("no candidate shared path")
    by_ends: dict[tuple[str, str], list[tuple[str, ...]]] = {}
    for q in shared:
        by_ends.setdefault((q[0], q[-1]), []).append(q)
    chosen: list[tuple[str, ...]] = []
    seen: set[tuple[str, ...]] = set()
    nfs = fork.shared
    for j in range(1, max(nd, 1) + 1):
        for ends in sorted(by_ends, key=lambda e: (node_key(e[0]), node_key(e[1]))):
            q = _best(by_ends[ends], lambda p: alpha * fork.open_sum(p, nfs) + j * beta * fork.walk_cost(p))
            if q not in seen:
                seen.add(q)
                chosen.append(q)
    conn = []
    tails: dict[tuple[int, str], tuple[str, ...]] = {}
    for q in chosen:
        row = []
        for k in range(nd):
            val, tail = client_cost(k, q)
            tails[(k, q[-1])] = tail
            row.append(val)
        conn.append(tuple(row))
    usable = [i for i, row in enumerate(conn) if all(math.isfinite(x) for x in row)]
    if not usable:
        raise InfeasibleForkError("no shared path serves every request")
    inst = FacLocInstance(
        tuple(f"d{k}" for k in range(nd)),
        tuple(("-".join(chosen[i]), fork.open_sum(chosen[i], nfs)) for i in usable),
        tuple(conn[i] for i in usable),
    )
    return Reduction(fork, alpha, beta, inst, tuple(chosen[i] for i in usable), tails)


def two_step_reduction(
    fork: ForkInstance, alpha: float, beta: float, cap: int = DEFAULT_CAP, k: int = DEFAULT_K
) -> Reduction:
    if alpha < 1 or beta < 1:
        raise ValueError("alpha and beta must be at least 1")
    # step 1: per request and first disjoint host u, the cheapest way from u to the target
    tail_from: dict[tuple[int, str], tuple[float, tuple[str, ...]]] = {}
    branch_paths = {b: level_paths(fork, nfs, cap, k) for b, nfs in enumerate(fork.branches)}
    for d, r in enumerate(fork.requests):
        nfs = fork.branches[r.branch]
        if not nfs:
            continue

        def value(p: tuple[str, ...], nfs=nfs, t=r.target) -> float:
            return fork.open_sum(p, nfs) + fork.walk_cost(p) + fork.d(p[-1], t)

        starts: dict[str, list[tuple[str, ...]]] = {}
        for p in branch_paths[r.branch]:
            starts.setdefault(p[0], []).append(p)
        if not starts:
            raise InfeasibleForkError(f"request {d}: empty candidate set for its branch")
        for u, cands in starts.items():
            p = _best(cands, value)
            tail_from[(d, u)] = (value(p), p)

    def client_cost(d: int, q: tuple[str, ...]) -> tuple[float, tuple[str, ...]]:
        r = fork.requests[d]
        head = fork.d(r.source, q[0]) + fork.walk_cost(q)
        w = q[-1]
        if not fork.branches[r.branch]:
            return head + fork.d(w, r.target), ()
        val, tail = min(
            ((fork.d(w, u) + v, p) for (dd, u), (v, p) in tail_from.items() if dd == d),
            key=lambda vp: (vp[0], _lex(vp[1])),
        )
        return head + val, tail

    # step 2: shared facilities
    return _assemble(fork, alpha, beta, level_paths(fork, fork.shared, cap, k), client_cost)


def reduce_1sfc(fork: ForkInstance, alpha: float, beta: float, cap: int = DEFAULT_CAP, k: int = DEFAULT_K) -> Reduction:
    """Direct reduction for a pure chain: facilities are whole host sequences."""
    if not fork.is_chain:
        raise InfeasibleForkError("reduce_1sfc needs a pure chain")
    table = convert_requests(fork)

    def client_cost(d: int, q: tuple[str, ...]) -> tuple[float, tuple[str, ...]]:
        return table.get((d, q[0], q[-1]), math.inf) + fork.walk_cost(q), ()

    return _assemble(fork, alpha, beta, level_paths(fork, fork.shared, cap, k), client_cost)
