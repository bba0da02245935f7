"""Path algorithms over the auxiliary network.

* :func:`sfc_shortest_path` -- minimum-weight path through the service levels.
* :func:`robust_sfc_path` -- widest (max-min node capacity) path, with ties
  resolved by total weight.
* :func:`k_shortest_candidate_paths` / :func:`k_shortest_service_paths` --
  candidate routes for the MILP.
* :func:`enumerate_paths_oracle` -- exhaustive reference enumeration.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, replace

import networkx as nx

from .auxnet import SOURCE, TARGET, AuxNetwork, AuxNode, build_sfc_arcs, attach_endpoints
from .netmodel import Demand, PhysicalNetwork, Routing, Scenario, node_key

__all__ = [
    "NoServicePathError",
    "PathExplosionError",
    "ServicePath",
    "canonicalize_nonchained",
    "enumerate_paths_oracle",
    "k_shortest_candidate_paths",
    "k_shortest_service_paths",
    "node_capacity",
    "robust_sfc_path",
    "service_aux",
    "sfc_shortest_path",
]

_TIE_SLACK = 1000  # extra equal-weight paths examined to settle ties
_EPS = 1e-12


class NoServicePathError(ValueError):
    pass


class PathExplosionError(RuntimeError):
    pass


def node_capacity(rho: float) -> float:
    """Capacity of an NF copy whose host fails with probability ``rho``."""
    return math.log1p(1.0 - rho)


@dataclass(frozen=True)
class ServicePath:
    aux_nodes: tuple[AuxNode, ...]
    physical: tuple[str, ...]
    total_weight: float
    bottleneck: float
    anchors: tuple[int, ...]
    objective: float = 0.0

    @property
    def hosts(self) -> tuple[str, ...]:
        return tuple(n.phys for n in self.aux_nodes)

    @property
    def nfs(self) -> tuple[str, ...]:
        return tuple(n.nf for n in self.aux_nodes)

    def survivable_prob(self, network: PhysicalNetwork) -> float:
        """Probability that every host on the path survives."""
        return math.prod(1.0 - network.rho(i) for i in sorted(set(self.hosts), key=node_key))

    def routing(self) -> Routing:
        return Routing(self.physical, tuple(zip(self.nfs, self.anchors)))


def _assemble(aux: AuxNetwork, seq: Sequence[AuxNode], objective: float | None = None) -> ServicePath:
    phys: list[str] = [seq[0].phys]
    anchors: list[int] = []
    weight = 0.0
    for a, b in zip(seq, seq[1:]):
        arc = aux.arc(a, b)
        weight += arc.weight
        phys.extend(arc.realization[1:])
        if not b.is_endpoint:
            anchors.append(len(phys) - 1)
    copies = tuple(n for n in seq if not n.is_endpoint)
    bott = min((node_capacity(aux.rho(n)) for n in copies), default=math.inf)
    return ServicePath(copies, tuple(phys), weight, bott, tuple(anchors), weight if objective is None else objective)


def _endpoints(aux: AuxNetwork, s: str, t: str) -> tuple[AuxNode, AuxNode]:
    src, dst = AuxNode(s, SOURCE), AuxNode(t, TARGET)
    if src not in aux.nodes or dst not in aux.nodes:
        raise NoServicePathError(f"endpoints {s}, {t} are not attached to the aux network")
    return src, dst


def _order_ok(aux: AuxNetwork, seq: Sequence[AuxNode]) -> bool:
    copies = [n for n in seq if not n.is_endpoint]
    if aux.kind == "sfc":
        return [aux.level(n) for n in copies] == list(range(len(copies)))
    nfs = [n.nf for n in copies]
    required = {n.nf for n in aux.nodes if not n.is_endpoint}
    return len(nfs) == len(set(nfs)) and set(nfs) == required


def _label_setting(
    aux: AuxNetwork,
    src: AuxNode,
    dst: AuxNode,
    allowed: Callable[[AuxNode], bool] | None = None,
    node_cost: Callable[[AuxNode], float] | None = None,
) -> tuple[list[AuxNode], float] | None:
    """Dijkstra labels w(j) = min over in-arcs [w(v) + w(e)] with lexicographic ties."""
    dist = {src: 0.0}
    pred: dict[AuxNode, AuxNode] = {}
    done: set[AuxNode] = set()
    heap = [(0.0, src.sort_key(), src)]
    g = aux.digraph
    while heap:
        d, _, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v == dst:
            break
        for w in sorted(g.successors(v), key=AuxNode.sort_key):
            if w in done or (allowed is not None and not w.is_endpoint and not allowed(w)):
                continue
            nd = d + g[v][w]["weight"] + (node_cost(w) if node_cost and not w.is_endpoint else 0.0)
            if nd < dist.get(w, math.inf) - _EPS:
                dist[w] = nd
                pred[w] = v
                heapq.heappush(heap, (nd, w.sort_key(), w))
    if dst not in done:
        return None
    seq = [dst]
    while seq[-1] != src:
        seq.append(pred[seq[-1]])
    return seq[::-1], dist[dst]


def sfc_shortest_path(
    aux: AuxNetwork, s: str, t: str, node_cost: Callable[[AuxNode], float] | None = None
) -> ServicePath:
    """Minimum-weight order-respecting path (optionally with NF-copy costs)."""
    if aux.kind != "sfc":
        raise NoServicePathError("shortest service paths need an SFC aux network; canonicalize first")
    src, dst = _endpoints(aux, s, t)
    found = _label_setting(aux, src, dst, node_cost=node_cost)
    if found is None:
        raise NoServicePathError(f"no service path from {s} to {t}")
    return _assemble(aux, found[0], found[1])


def _widest_value(aux: AuxNetwork, src: AuxNode, dst: AuxNode) -> float | None:
    """Widest-path labels w(j) = max over in-arcs min(w(v), cap(j)); source label is +inf."""
    best = {src: math.inf}
    done: set[AuxNode] = set()
    heap = [(-math.inf, src.sort_key(), src)]
    g = aux.digraph
    while heap:
        negb, _, v = heapq.heappop(heap)  # frontier node of maximum label
        if v in done:
            continue
        done.add(v)
        if v == dst:
            return -negb
        for w in g.successors(v):
            if w in done:
                continue
            cap = math.inf if w.is_endpoint else node_capacity(aux.rho(w))
            nb = min(-negb, cap)
            if nb > best.get(w, -math.inf):
                best[w] = nb
                heapq.heappush(heap, (-nb, w.sort_key(), w))
    return None


def robust_sfc_path(aux: AuxNetwork, s: str, t: str) -> ServicePath:
    """Path maximizing the smallest NF-copy capacity; shortest among those."""
    if aux.kind != "sfc":
        raise NoServicePathError("robust service paths need an SFC aux network; canonicalize first")
    src, dst = _endpoints(aux, s, t)
    width = _widest_value(aux, src, dst)
    if width is None:
        raise NoServicePathError(f"no service path from {s} to {t}")
    found = _label_setting(aux, src, dst, allowed=lambda n: node_capacity(aux.rho(n)) >= width)
    assert found is not None
    path = _assemble(aux, found[0], found[1])
    return path


def canonicalize_nonchained(demand: Demand) -> Demand:
    """Impose lexicographic NF order on an unordered demand."""
    if demand.ordered:
        return demand
    return replace(demand, nfs=tuple(sorted(demand.nfs)), ordered=True, canonicalized=True)


def service_aux(scenario: Scenario, demand: Demand) -> AuxNetwork:
    """SFC aux network for one demand (canonicalized when unordered), endpoints attached."""
    d = canonicalize_nonchained(demand)
    return attach_endpoints(build_sfc_arcs(scenario, d.nfs), d)


def _ordered_by_weight(paths: Iterator[list], weight: Callable[[list], float], key: Callable[[list], tuple], k: int) -> list[list]:
    """First ``k`` paths of a nondecreasing-weight stream, ties settled by ``key``."""
    got: list[tuple[float, list]] = []
    extra = 0
    for p in paths:
        w = weight(p)
        if len(got) >= k:
            if w > got[k - 1][0] + 1e-9 or extra >= _TIE_SLACK:
                break
            extra += 1
        got.append((w, p))
    got.sort(key=lambda wp: (round(wp[0], 9), key(wp[1])))
    return [p for _, p in got[:k]]


def k_shortest_candidate_paths(network: PhysicalNetwork, s: str, t: str, k: int) -> list[tuple[str, ...]]:
    """Up to ``k`` loopless s-t paths in nondecreasing weight (Yen)."""
    if k < 1:
        raise ValueError("k must be positive")
    if s == t or s not in network or t not in network:
        raise ValueError("need two distinct nodes of the network")
    g = network.graph
    if not nx.has_path(g, s, t):
        return []

    def weight(p: list) -> float:
        return sum(g[a][b]["weight"] for a, b in zip(p, p[1:]))

    stream = nx.shortest_simple_paths(g, s, t, weight="weight")
    return [tuple(p) for p in _ordered_by_weight(stream, weight, lambda p: tuple(node_key(x) for x in p), k)]


def k_shortest_service_paths(aux: AuxNetwork, s: str, t: str, k: int) -> list[ServicePath]:
    """Up to ``k`` order-respecting service paths in nondecreasing weight."""
    src, dst = _endpoints(aux, s, t)
    g = aux.digraph
    if not nx.has_path(g, src, dst):
        return []

    def weight(p: list) -> float:
        return sum(g[a][b]["weight"] for a, b in zip(p, p[1:]))

    stream = (p for p in nx.shortest_simple_paths(g, src, dst, weight="weight") if _order_ok(aux, p))
    picked = _ordered_by_weight(stream, weight, lambda p: tuple(n.sort_key() for n in p), k)
    return [_assemble(aux, p) for p in picked]


def enumerate_paths_oracle(
    graph: nx.Graph | AuxNetwork, s: str, t: str, limit: int = 2000
) -> list[tuple]:
    """Every simple s-t path, by depth-first search.

    For an aux network the result lists aux-node sequences from the source
    copy to the target copy, restricted to order-respecting paths.
    """
    if isinstance(graph, AuxNetwork):
        aux = graph
        g = aux.digraph
        src, dst = _endpoints(aux, s, t)
        keep: Callable[[list], bool] = lambda p: _order_ok(aux, p)  # noqa: E731
        order = AuxNode.sort_key
    else:
        g, src, dst = graph, s, t
        keep = lambda p: True  # noqa: E731
        order = node_key
    out: list[tuple] = []
    path = [src]
    on_path = {src}

    def walk(v) -> None:
        if v == dst:
            if keep(path):
                if len(out) >= limit:
                    raise PathExplosionError(f"more than {limit} simple paths")
                out.append(tuple(path))
            return
        for w in sorted(g.successors(v) if g.is_directed() else g.neighbors(v), key=order):
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                walk(w)
                path.pop()
                on_path.discard(w)

    walk(src)
    return out


def assemble_aux_path(aux: AuxNetwork, seq: Sequence[AuxNode]) -> ServicePath:
    """ServicePath for an explicit aux-node sequence (source copy to target copy)."""
    return _assemble(aux, seq)


def all_orders(demand: Demand) -> list[tuple[str, ...]]:
    return list(itertools.permutations(sorted(demand.nfs)))
