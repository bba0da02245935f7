"""Auxiliary NF-enabled network.

Every (physical node, NF) pair the node can host becomes an :class:`AuxNode`.
Arcs join copies of consecutive service levels and remember the shortest
physical path that realizes them.  Demands attach through endpoint copies
tagged :data:`SOURCE` / :data:`TARGET`.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Literal

import networkx as nx

from .netmodel import Demand, Scenario, node_key

__all__ = [
    "SOURCE",
    "TARGET",
    "AuxArc",
    "AuxConstructionError",
    "AuxNetwork",
    "AuxNode",
    "ForwardingGraph",
    "attach_endpoints",
    "build_aux_nodes",
    "build_nonchained_arcs",
    "build_sfc_arcs",
    "dump_aux",
]

SOURCE = "<src>"
TARGET = "<dst>"


class AuxConstructionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class AuxNode:
    phys: str
    nf: str

    @property
    def is_endpoint(self) -> bool:
        return self.nf in (SOURCE, TARGET)

    @property
    def label(self) -> str:
        return f"{self.phys}@{self.nf}"

    def sort_key(self) -> tuple:
        return (node_key(self.phys), self.nf)


@dataclass(frozen=True)
class AuxArc:
    tail: AuxNode
    head: AuxNode
    weight: float
    realization: tuple[str, ...]


@dataclass(frozen=True)
class ForwardingGraph:
    """Logical NF graph: a chain or a rooted tree with one branching NF."""

    edges: tuple[tuple[str, str], ...]
    root: str

    @classmethod
    def chain(cls, nfs: Sequence[str]) -> ForwardingGraph:
        if not nfs:
            raise AuxConstructionError("empty chain")
        return cls(tuple(zip(nfs, nfs[1:])), nfs[0])

    @classmethod
    def fork(cls, shared: Sequence[str], branches: Sequence[Sequence[str]]) -> ForwardingGraph:
        edges = list(zip(shared, shared[1:]))
        for br in branches:
            seq = [shared[-1], *br]
            edges += list(zip(seq, seq[1:]))
        return cls(tuple(dict.fromkeys(edges)), shared[0])

    @cached_property
    def levels(self) -> dict[str, int]:
        depth = {self.root: 0}
        frontier = [self.root]
        children: dict[str, list[str]] = {}
        for a, b in self.edges:
            children.setdefault(a, []).append(b)
        while frontier:
            nxt = []
            for f in frontier:
                for g in children.get(f, []):
                    if g in depth:
                        raise AuxConstructionError(f"forwarding graph is not a tree at {g}")
                    depth[g] = depth[f] + 1
                    nxt.append(g)
            frontier = nxt
        return depth

    @property
    def nfs(self) -> list[str]:
        return sorted(self.levels, key=lambda f: (self.levels[f], f))

    def leaves(self) -> list[str]:
        tails = {a for a, _ in self.edges}
        return [f for f in self.nfs if f not in tails]

    def chains(self) -> list[tuple[str, ...]]:
        parent = {b: a for a, b in self.edges}
        out = []
        for leaf in self.leaves():
            seq = [leaf]
            while seq[-1] in parent:
                seq.append(parent[seq[-1]])
            out.append(tuple(reversed(seq)))
        return out


@dataclass(frozen=True)
class AuxNetwork:
    nodes: frozenset[AuxNode]
    arcs: tuple[AuxArc, ...]
    kind: Literal["sfc", "nonchained"]
    origin: Scenario = field(repr=False, compare=False)
    forwarding: ForwardingGraph | None = None

    @cached_property
    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for n in sorted(self.nodes, key=AuxNode.sort_key):
            g.add_node(n)
        for a in self.arcs:
            g.add_edge(a.tail, a.head, weight=a.weight, arc=a)
        return g

    def arc(self, tail: AuxNode, head: AuxNode) -> AuxArc:
        return self.digraph[tail][head]["arc"]

    def out_arcs(self, node: AuxNode) -> list[AuxArc]:
        return [d["arc"] for _, _, d in self.digraph.out_edges(node, data=True)]

    def rho(self, node: AuxNode) -> float:
        return 0.0 if node.is_endpoint else self.origin.network.rho(node.phys)

    def level(self, node: AuxNode) -> int:
        """Service level of a copy (source -1, target one past the deepest)."""
        assert self.forwarding is not None
        if node.nf == SOURCE:
            return -1
        if node.nf == TARGET:
            return max(self.forwarding.levels.values()) + 1
        return self.forwarding.levels[node.nf]

    def copies(self, nf: str) -> list[AuxNode]:
        return sorted((n for n in self.nodes if n.nf == nf), key=AuxNode.sort_key)


def build_aux_nodes(scenario: Scenario) -> frozenset[AuxNode]:
    return frozenset(AuxNode(n.id, f) for n in scenario.network.nodes for f in n.capabilities)


def _realize(scenario: Scenario, u: str, v: str) -> tuple[float, tuple[str, ...]] | None:
    net = scenario.network
    if u == v:
        return 0.0, (u,)
    d = net.distance(u, v)
    if math.isinf(d):
        return None
    path = net.shortest_path(u, v)
    assert path is not None
    return d, path


def _level_arcs(scenario: Scenario, tails: Iterable[AuxNode], heads: Iterable[AuxNode]) -> list[AuxArc]:
    out = []
    heads = sorted(heads, key=AuxNode.sort_key)
    for a in sorted(tails, key=AuxNode.sort_key):
        for b in heads:
            if a == b:
                continue
            r = _realize(scenario, a.phys, b.phys)
            if r is not None:
                out.append(AuxArc(a, b, r[0], r[1]))
    return out


def _pool_copies(scenario: Scenario, nf: str) -> list[AuxNode]:
    pool = scenario.catalog.pool.get(nf, frozenset())
    if not pool:
        raise AuxConstructionError(f"level {nf}: no node can host this NF")
    return [AuxNode(i, nf) for i in sorted(pool, key=node_key)]


def build_sfc_arcs(scenario: Scenario, forwarding: ForwardingGraph | Sequence[str]) -> AuxNetwork:
    """Aux network whose arcs follow the logical edges of ``forwarding``."""
    fg = forwarding if isinstance(forwarding, ForwardingGraph) else ForwardingGraph.chain(tuple(forwarding))
    _ = fg.levels
    nodes = {c for f in fg.levels for c in _pool_copies(scenario, f)}
    arcs: list[AuxArc] = []
    for fi, fj in fg.edges:
        level = _level_arcs(scenario, _pool_copies(scenario, fi), _pool_copies(scenario, fj))
        if not level:
            raise AuxConstructionError(f"level {fi}->{fj}: no pair of hosts is connected")
        arcs += level
    return AuxNetwork(frozenset(nodes), tuple(arcs), "sfc", scenario, fg)


def build_nonchained_arcs(scenario: Scenario, demand: Demand) -> AuxNetwork:
    """Aux network for an unordered demand: every pair of required copies, both directions."""
    if demand.ordered:
        raise AuxConstructionError("demand is ordered; use build_sfc_arcs")
    per_nf = {f: _pool_copies(scenario, f) for f in sorted(demand.nfs)}
    nodes = {c for cs in per_nf.values() for c in cs}
    arcs: list[AuxArc] = []
    names = list(per_nf)
    for a in range(len(names)):
        for b in range(len(names)):
            if a == b:
                continue
            level = _level_arcs(scenario, per_nf[names[a]], per_nf[names[b]])
            if not level:
                raise AuxConstructionError(f"level {names[a]}->{names[b]}: no pair of hosts is connected")
            arcs += level
    aux = AuxNetwork(frozenset(nodes), tuple(arcs), "nonchained", scenario, None)
    return attach_endpoints(aux, demand)


def attach_endpoints(aux: AuxNetwork, demand: Demand) -> AuxNetwork:
    """Add the demand's source and target copies."""
    scen = aux.origin
    if aux.kind == "sfc":
        assert aux.forwarding is not None
        first = [demand.nfs[0]]
        last = [demand.nfs[-1]]
    else:
        first = last = sorted(demand.nfs)
    src, dst = AuxNode(demand.source, SOURCE), AuxNode(demand.target, TARGET)
    out = _level_arcs(scen, [src], [c for f in first for c in aux.copies(f)])
    if not out:
        raise AuxConstructionError(f"source {demand.source} reaches no host of {first[0]}")
    inn = _level_arcs(scen, [c for f in last for c in aux.copies(f)], [dst])
    if not inn:
        raise AuxConstructionError(f"target {demand.target} is unreachable from every host of {last[0]}")
    return replace(aux, nodes=aux.nodes | {src, dst}, arcs=aux.arcs + tuple(out) + tuple(inn))


def dump_aux(aux: AuxNetwork) -> str:
    """Text edge list: ``tail head weight realization``."""
    lines = [
        f"{a.tail.label} {a.head.label} {a.weight:.17g} {'-'.join(a.realization)}"
        for a in sorted(aux.arcs, key=lambda a: (a.tail.sort_key(), a.head.sort_key()))
    ]
    return "\n".join(lines) + ("\n" if lines else "")
