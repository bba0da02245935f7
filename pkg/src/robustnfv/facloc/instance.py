"""Instances and solutions for NF placement on SFC-Fork forwarding graphs."""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from ..netmodel import Deployment, Scenario, node_key

__all__ = [
    "FacLocInstance",
    "FLSolution",
    "ForkInstance",
    "ForkSolution",
    "InfeasibleForkError",
    "MetricViolation",
    "Request",
]


class InfeasibleForkError(ValueError):
    pass


class MetricViolation(ValueError):
    pass


@dataclass(frozen=True)
class Request:
    source: str
    target: str
    branch: int = 0


@dataclass(frozen=True)
class ForkInstance:
    """Rooted NF tree with one branching NF, per-NF host pools and a metric.

    ``shared`` lists the NFs up to and including the branching NF; each entry
    of ``branches`` lists one branch's remaining NFs.  A single branch is
    folded into ``shared`` (a pure chain has no branching NF).
    """

    shared: tuple[str, ...]
    branches: tuple[tuple[str, ...], ...]
    pools: Mapping[str, tuple[str, ...]]
    open_cost: Mapping[tuple[str, str], float]
    dist: Mapping[str, Mapping[str, float]] = field(repr=False)
    requests: tuple[Request, ...]

    def __post_init__(self) -> None:
        if not self.shared:
            raise InfeasibleForkError("fork needs at least one shared NF")
        if len(self.branches) == 1 and self.branches[0]:
            object.__setattr__(self, "shared", self.shared + self.branches[0])
            object.__setattr__(self, "branches", ((),))
        if not self.branches:
            object.__setattr__(self, "branches", ((),))
        seen = list(self.shared) + [f for b in self.branches for f in b]
        if len(seen) != len(set(seen)):
            raise InfeasibleForkError("an NF appears twice in the forwarding tree")
        if len(self.branches) > 1 and any(not b for b in self.branches):
            raise InfeasibleForkError("every branch of a fork needs at least one NF")
        for f in seen:
            if not self.pools.get(f):
                raise InfeasibleForkError(f"level {f}: empty host pool")
        for r in self.requests:
            if not 0 <= r.branch < len(self.branches):
                raise InfeasibleForkError(f"request {r.source}->{r.target}: unknown branch {r.branch}")

    @property
    def b(self) -> int:
        return len(self.shared)

    @property
    def is_chain(self) -> bool:
        return len(self.branches) == 1

    def chain(self, request: int) -> tuple[str, ...]:
        return self.shared + self.branches[self.requests[request].branch]

    def d(self, u: str, v: str) -> float:
        if u == v:
            return 0.0
        return self.dist[u].get(v, math.inf)

    def cost(self, node: str, nf: str) -> float:
        return self.open_cost.get((node, nf), 1.0)

    def walk_cost(self, nodes: Sequence[str]) -> float:
        return sum(self.d(a, b) for a, b in zip(nodes, nodes[1:]))

    def open_sum(self, nodes: Sequence[str], nfs: Sequence[str]) -> float:
        return sum(self.cost(i, f) for i, f in zip(nodes, nfs))

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> ForkInstance:
        """Derive the tree from the scenario's (ordered) demands."""
        chains = []
        for d in scenario.demands:
            if not d.ordered:
                raise InfeasibleForkError(f"demand {d.label} is unordered")
            chains.append(d.nfs)
        if not chains:
            raise InfeasibleForkError("scenario has no demands")
        distinct = sorted(set(chains))
        if len(distinct) == 1:
            shared, suffixes = distinct[0], [()]
        else:
            n = 0
            while all(len(c) > n for c in distinct) and len({c[n] for c in distinct}) == 1:
                n += 1
            if n == 0:
                raise InfeasibleForkError("demands do not share a root NF")
            shared = distinct[0][:n]
            suffixes = [c[n:] for c in distinct]
        pools = {f: tuple(sorted(scenario.catalog.pool[f], key=node_key)) for c in chains for f in c}
        costs = {(i, f): scenario.cost(i, f) for f, ns in pools.items() for i in ns}
        net = scenario.network
        reqs = tuple(Request(d.source, d.target, suffixes.index(d.nfs[len(shared):])) for d in scenario.demands)
        return cls(tuple(shared), tuple(suffixes), pools, costs, net.distances, reqs)


@dataclass(frozen=True)
class ForkSolution:
    """One host sequence per request, aligned with the request's chain."""

    fork: ForkInstance = field(repr=False, compare=False)
    paths: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        for k, p in enumerate(self.paths):
            chain = self.fork.chain(k)
            if len(p) != len(chain):
                raise InfeasibleForkError(f"request {k}: path length does not match its chain")
            for i, f in zip(p, chain):
                if i not in self.fork.pools[f]:
                    raise InfeasibleForkError(f"request {k}: {i} cannot host {f}")

    @cached_property
    def copies(self) -> frozenset[tuple[str, str]]:
        return frozenset((i, f) for k, p in enumerate(self.paths) for i, f in zip(p, self.fork.chain(k)))

    @property
    def deployment(self) -> Deployment:
        out: dict[str, set[str]] = {}
        for i, f in self.copies:
            out.setdefault(f, set()).add(i)
        return Deployment.of(out)

    @property
    def shared_paths(self) -> tuple[tuple[str, ...], ...]:
        return tuple(p[: self.fork.b] for p in self.paths)

    @property
    def disjoint_paths(self) -> tuple[tuple[str, ...], ...]:
        return tuple(p[self.fork.b :] for p in self.paths)

    def request_cost(self, k: int) -> float:
        r, p = self.fork.requests[k], self.paths[k]
        return self.fork.d(r.source, p[0]) + self.fork.walk_cost(p) + self.fork.d(p[-1], r.target)

    @cached_property
    def O(self) -> float:  # noqa: N802 - deployment cost
        return sum(self.fork.cost(i, f) for i, f in sorted(self.copies))

    @cached_property
    def C(self) -> float:  # noqa: N802 - connection cost
        return sum(self.request_cost(k) for k in range(len(self.paths)))

    @property
    def C_last(self) -> float:  # noqa: N802
        """Connection cost from the last NF host to each target."""
        return sum(self.fork.d(p[-1], r.target) for r, p in zip(self.fork.requests, self.paths))

    @property
    def total(self) -> float:
        return self.O + self.C

    def forest_violations(self) -> list[tuple[int, int, int]]:
        """(request, request, level) triples that agree at a level but not before it."""
        bad = []
        for a, b in itertools.combinations(range(len(self.paths)), 2):
            pa, pb = self.paths[a], self.paths[b]
            ca, cb = self.fork.chain(a), self.fork.chain(b)
            for lvl in range(min(len(pa), len(pb))):
                if ca[lvl] != cb[lvl]:
                    break
                if pa[lvl] == pb[lvl] and pa[:lvl] != pb[:lvl]:
                    bad.append((a, b, lvl))
        return bad

    def is_forest(self) -> bool:
        return not self.forest_violations()

    def with_paths(self, paths: Sequence[Sequence[str]]) -> ForkSolution:
        return replace(self, paths=tuple(tuple(p) for p in paths))


@dataclass(frozen=True)
class FacLocInstance:
    """1-level facility location: ``conn[i][j]`` is facility i to client j."""

    clients: tuple[str, ...]
    facilities: tuple[tuple[str, float], ...]
    conn: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.conn) != len(self.facilities) or any(len(r) != len(self.clients) for r in self.conn):
            raise ValueError("connection matrix shape does not match facilities x clients")
        if any(c < 0 for _, c in self.facilities) or any(x < 0 for r in self.conn for x in r):
            raise ValueError("costs must be nonnegative")

    @cached_property
    def C(self) -> np.ndarray:  # noqa: N802
        return np.array(self.conn, dtype=float).reshape(len(self.facilities), len(self.clients))

    @cached_property
    def F(self) -> np.ndarray:  # noqa: N802
        return np.array([c for _, c in self.facilities], dtype=float)

    def scaled(self, factor: float) -> FacLocInstance:
        return replace(self, facilities=tuple((n, c * factor) for n, c in self.facilities))

    def metric_gap(self) -> float:
        """Largest violation of c(i,j) <= c(i,j') + c(i',j') + c(i',j)."""
        c = self.C
        if c.size == 0:
            return 0.0
        # rhs[i, j, i2, j2] = c[i, j2] + c[i2, j2] + c[i2, j]
        rhs = c[:, None, None, :] + c[None, None, :, :] + c.T[None, :, :, None]
        return float(max(0.0, (c[:, :, None, None] - rhs).max()))

    def validate_metric(self, tol: float = 1e-9) -> None:
        gap = self.metric_gap()
        if gap > tol:
            raise MetricViolation(f"connection costs violate the triangle inequality by {gap}")


@dataclass(frozen=True)
class FLSolution:
    instance: FacLocInstance = field(repr=False, compare=False)
    open: tuple[int, ...]
    assign: tuple[int, ...]

    @property
    def facility_cost(self) -> float:
        return float(sum(self.instance.F[i] for i in self.open))

    @property
    def connection_cost(self) -> float:
        return float(sum(self.instance.C[i, j] for j, i in enumerate(self.assign)))

    @property
    def total(self) -> float:
        return self.facility_cost + self.connection_cost

    def weighted(self, alpha: float, beta: float) -> float:
        return alpha * self.facility_cost + beta * self.connection_cost
