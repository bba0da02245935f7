"""Random instance generators shared by the test-suite."""

from __future__ import annotations

import random

import networkx as nx

from robustnfv.facloc import ForkInstance, Request
from robustnfv.netmodel import (
    Demand,
    NodeRecord,
    PhysicalNetwork,
    Scenario,
    Sampling,
    make_catalog,
)


def random_two_connected(rng: random.Random, n: int, extra: int, weighted: bool = False) -> nx.Graph:
    """A Hamiltonian cycle plus random chords: always 2-connected."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    g = nx.Graph()
    g.add_nodes_from(range(1, n + 1))
    for a, b in zip(order, order[1:] + order[:1]):
        g.add_edge(a, b)
    tries = 0
    while extra > 0 and tries < 100:
        tries += 1
        a, b = rng.sample(range(1, n + 1), 2)
        if not g.has_edge(a, b):
            g.add_edge(a, b)
            extra -= 1
    for a, b in g.edges:
        g[a][b]["weight"] = float(rng.randint(1, 5)) if weighted else 1.0
    return g


def network_from(g: nx.Graph, rho: dict[int, float], caps: dict[int, set[str]]) -> PhysicalNetwork:
    nodes = tuple(NodeRecord(str(i), rho.get(i, 0.0), frozenset(caps.get(i, ()))) for i in sorted(g.nodes))
    edges = tuple((str(a), str(b), float(d.get("weight", 1.0))) for a, b, d in sorted(g.edges(data=True)))
    return PhysicalNetwork(nodes, edges)


def random_scenario(
    rng: random.Random,
    n: int = 6,
    nfs: tuple[str, ...] = ("f1", "f2"),
    pool_size: tuple[int, int] = (1, 3),
    demands: int = 2,
    ordered: bool | None = None,
    limit: int = 2,
    extra_edges: int = 3,
    weighted: bool = False,
    rho_choices: tuple[float, ...] | None = None,
    per_demand_nfs: tuple[int, int] | None = None,
) -> Scenario:
    g = random_two_connected(rng, n, extra_edges, weighted)
    caps: dict[int, set[str]] = {}
    for f in nfs:
        for i in rng.sample(range(1, n + 1), rng.randint(*pool_size)):
            caps.setdefault(i, set()).add(f)
    rho = {i: (rng.choice(rho_choices) if rho_choices else round(rng.uniform(0.01, 0.6), 3)) for i in range(1, n + 1)}
    net = network_from(g, rho, caps)
    ds = []
    while len(ds) < demands:
        s, t = rng.sample(range(1, n + 1), 2)
        k = rng.randint(*per_demand_nfs) if per_demand_nfs else len(nfs)
        chosen = tuple(rng.sample(nfs, k))
        ds.append(Demand(str(s), str(t), rng.random() < 0.5 if ordered is None else ordered, chosen))
    cat = make_catalog(net.nodes, {f: limit for f in nfs})
    return Scenario(net, tuple(ds), cat, Sampling())


def random_fork(
    rng: random.Random,
    n: int = 7,
    shared: int | None = None,
    branches: int | None = None,
    branch_len: tuple[int, int] = (1, 2),
    pool: tuple[int, int] = (1, 2),
    per_branch: int = 2,
    weighted: bool = True,
    cost_range: tuple[float, float] = (0.5, 3.0),
) -> ForkInstance:
    g = random_two_connected(rng, n, rng.randint(1, 4), weighted)
    shared = shared or rng.randint(1, 2)
    branches = branches if branches is not None else rng.randint(1, 2)
    names = iter(f"f{k}" for k in range(1, 100))
    sh = tuple(next(names) for _ in range(shared))
    brs = tuple(tuple(next(names) for _ in range(rng.randint(*branch_len))) for _ in range(branches))
    nodes = [str(i) for i in range(1, n + 1)]
    pools = {f: tuple(sorted(rng.sample(nodes, rng.randint(*pool)), key=int)) for f in sh + tuple(x for b in brs for x in b)}
    costs = {(i, f): round(rng.uniform(*cost_range), 2) for f, ps in pools.items() for i in ps}
    dist = {str(u): {str(v): float(w) for v, w in d.items()} for u, d in nx.all_pairs_dijkstra_path_length(g)}
    reqs = []
    for b in range(branches):
        for _ in range(per_branch):
            s, t = rng.sample(nodes, 2)
            reqs.append(Request(s, t, b))
    return ForkInstance(sh, brs, pools, costs, dist, tuple(reqs))
