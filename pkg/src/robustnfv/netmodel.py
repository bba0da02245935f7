"""Substrate networks, NF catalogs, demands and scenario files.

Scenario file grammar (UTF-8, one record per line, ``#`` starts a comment)::

    [network]                 optional
    directed <yes|no>
    [nodes]
    <node-id> <failure-prob> <nf,nf,...|->
    [edges]
    <u> <v> [<weight>]        weight defaults to 1
    [nfs]
    <nf-id> <limit>
    [demands]
    <s> <t> <yes|no> <nf,nf,...>      third field: ordered (chain) flag
    [costs]                   optional, deployment cost per NF copy
    <node-id> <nf-id> <cost>
    [sampling]                optional
    mean <real> | variance <real> | samples <int> | seed <int>
    [deployment]              optional
    <nf-id> <node,node,...>
    [routes]                  optional, one fixed routing per demand
    <demand-index> <node,node,...> [<nf@node,...>]

Identifiers match ``[A-Za-z0-9_.-]+``.  Every record must have exactly the
listed fields; anything else on a line is rejected with its line and column.
"""

from __future__ import annotations

import math
import re
import warnings
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources

import networkx as nx
import numpy as np
from scipy import stats

__all__ = [
    "Deployment",
    "Demand",
    "NFCatalog",
    "NodeRecord",
    "PhysicalNetwork",
    "Routing",
    "Sampling",
    "Scenario",
    "ScenarioError",
    "ScenarioInvariantError",
    "ScenarioReferenceError",
    "ScenarioSyntaxError",
    "builtin_scenario_text",
    "builtin_topology",
    "make_catalog",
    "load_scenario",
    "node_key",
    "parse_scenario",
    "sample_failure_probs",
    "serialize_scenario",
]

_ID = re.compile(r"[A-Za-z0-9_.\-]+\Z")
_SECTIONS = ("network", "nodes", "edges", "nfs", "demands", "costs", "sampling", "deployment", "routes")
_TRUE = {"yes", "true", "1", "ordered"}
_FALSE = {"no", "false", "0", "unordered"}


class ScenarioError(ValueError):
    """Base class for scenario input problems."""


class ScenarioSyntaxError(ScenarioError):
    def __init__(self, line: int, column: int, message: str) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ScenarioReferenceError(ScenarioError):
    """A record names a node or NF that was never declared."""


class ScenarioInvariantError(ScenarioError):
    """The scenario parses but violates a model invariant."""


def node_key(node: str) -> tuple[int, int | str]:
    """Natural sort key: numeric ids in numeric order, before textual ones."""
    return (0, int(node)) if node.isdigit() else (1, node)


@dataclass(frozen=True)
class NodeRecord:
    id: str
    failure_prob: float = 0.0
    capabilities: frozenset[str] = frozenset()


@dataclass(frozen=True)
class PhysicalNetwork:
    nodes: tuple[NodeRecord, ...]
    edges: tuple[tuple[str, str, float], ...]
    directed: bool = False

    def __post_init__(self) -> None:
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ScenarioInvariantError("duplicate node id")
        known = set(ids)
        for n in self.nodes:
            if not 0.0 <= n.failure_prob <= 1.0:
                raise ScenarioInvariantError(f"node {n.id}: failure probability {n.failure_prob} outside [0, 1]")
        for u, v, w in self.edges:
            if u not in known or v not in known:
                raise ScenarioReferenceError(f"edge ({u}, {v}) references an unknown node")
            if not w >= 0:
                raise ScenarioInvariantError(f"edge ({u}, {v}) has negative weight {w}")

    @cached_property
    def _index(self) -> dict[str, NodeRecord]:
        return {n.id: n for n in self.nodes}

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def node(self, node_id: str) -> NodeRecord:
        return self._index[node_id]

    def __contains__(self, node_id: object) -> bool:
        return node_id in self._index

    def rho(self, node_id: str) -> float:
        return self._index[node_id].failure_prob

    @cached_property
    def graph(self) -> nx.Graph:
        g: nx.Graph = nx.DiGraph() if self.directed else nx.Graph()
        g.add_nodes_from(self.node_ids)
        for u, v, w in self.edges:
            # parallel links collapse to the lighter one
            if g.has_edge(u, v) and g[u][v]["weight"] <= w:
                continue
            g.add_edge(u, v, weight=float(w))
        return g

    @cached_property
    def distances(self) -> dict[str, dict[str, float]]:
        """All-pairs shortest-path distances (missing key means unreachable)."""
        return {u: dict(d) for u, d in nx.all_pairs_dijkstra_path_length(self.graph, weight="weight")}

    @cached_property
    def _paths(self) -> dict[str, dict[str, list[str]]]:
        return {u: dict(p) for u, p in nx.all_pairs_dijkstra_path(self.graph, weight="weight")}

    def distance(self, u: str, v: str) -> float:
        return self.distances[u].get(v, math.inf)

    def shortest_path(self, u: str, v: str) -> tuple[str, ...] | None:
        p = self._paths[u].get(v)
        return None if p is None else tuple(p)

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        g = self.graph
        return nx.is_weakly_connected(g) if self.directed else nx.is_connected(g)

    def is_two_connected(self) -> bool:
        g = self.graph.to_undirected() if self.directed else self.graph
        return len(self.nodes) >= 3 and nx.is_biconnected(g)

    def validate(self) -> None:
        """Raise if disconnected; warn if not 2-connected."""
        if not self.is_connected():
            raise ScenarioInvariantError("physical network is not connected")
        if len(self.nodes) >= 3 and not self.is_two_connected():
            warnings.warn("physical network is not 2-connected", stacklevel=2)

    def with_failure_probs(self, probs: Mapping[str, float]) -> PhysicalNetwork:
        nodes = tuple(replace(n, failure_prob=float(probs.get(n.id, n.failure_prob))) for n in self.nodes)
        return replace(self, nodes=nodes)

    def with_capabilities(self, caps: Mapping[str, Iterable[str]]) -> PhysicalNetwork:
        nodes = tuple(replace(n, capabilities=frozenset(caps.get(n.id, n.capabilities))) for n in self.nodes)
        return replace(self, nodes=nodes)


@dataclass(frozen=True)
class Demand:
    source: str
    target: str
    ordered: bool
    nfs: tuple[str, ...]
    canonicalized: bool = False

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ScenarioInvariantError(f"demand {self.source}->{self.target}: source equals target")
        if not self.nfs:
            raise ScenarioInvariantError(f"demand {self.source}->{self.target}: no NFs requested")
        if len(set(self.nfs)) != len(self.nfs):
            raise ScenarioInvariantError(f"demand {self.source}->{self.target}: duplicate NF")

    @property
    def label(self) -> str:
        return f"{self.source}-{self.target}"

    @property
    def factorial(self) -> int:
        """Divisor applied to chained demands by the robustness metric."""
        return math.factorial(len(self.nfs)) if self.ordered else 1


@dataclass(frozen=True)
class NFCatalog:
    nfs: frozenset[str]
    pool: Mapping[str, frozenset[str]]
    limit: Mapping[str, int]

    def __post_init__(self) -> None:
        for f in self.nfs:
            if self.limit.get(f, 0) < 0:
                raise ScenarioInvariantError(f"NF {f}: negative limit")

    def sorted_nfs(self) -> list[str]:
        return sorted(self.nfs)


@dataclass(frozen=True)
class Sampling:
    mean: float = 0.25
    variance: float = 0.001
    samples: int = 25
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.mean < 1.0:
            raise ScenarioInvariantError(f"sampling mean {self.mean} outside (0, 1)")
        if not self.variance > 0.0:
            raise ScenarioInvariantError("sampling variance must be positive")
        if self.samples < 1:
            raise ScenarioInvariantError("sampling needs at least one sample")


@dataclass(frozen=True)
class Deployment:
    """NF placement: which physical nodes host an instance of each NF."""

    placement: Mapping[str, frozenset[str]]

    @classmethod
    def of(cls, placement: Mapping[str, Iterable[str]]) -> Deployment:
        return cls({f: frozenset(nodes) for f, nodes in sorted(placement.items())})

    def hosts(self, nf: str) -> frozenset[str]:
        return self.placement.get(nf, frozenset())

    def copies(self) -> list[tuple[str, str]]:
        return sorted(((i, f) for f, ns in self.placement.items() for i in ns), key=lambda c: (node_key(c[0]), c[1]))

    def validate(self, catalog: NFCatalog) -> None:
        for f, ns in self.placement.items():
            if f not in catalog.nfs:
                raise ScenarioReferenceError(f"deployment names unknown NF {f}")
            extra = ns - catalog.pool.get(f, frozenset())
            if extra:
                raise ScenarioInvariantError(f"NF {f} deployed outside its pool: {sorted(extra, key=node_key)}")
            if len(ns) > catalog.limit[f]:
                raise ScenarioInvariantError(f"NF {f}: {len(ns)} copies exceed limit {catalog.limit[f]}")

    def __hash__(self) -> int:
        return hash(tuple(sorted((f, tuple(sorted(ns))) for f, ns in self.placement.items())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Deployment):
            return NotImplemented
        mine = {f: ns for f, ns in self.placement.items() if ns}
        theirs = {f: ns for f, ns in other.placement.items() if ns}
        return mine == theirs


@dataclass(frozen=True)
class Routing:
    """A physical walk for one demand.

    ``anchors`` pins each chained NF to a position on the walk; the NF may
    then be served by any deployed copy between the neighbouring anchors.
    Unordered demands leave it empty and may use any copy on the walk.
    """

    path: tuple[str, ...]
    anchors: tuple[tuple[str, int], ...] = ()

    @property
    def anchor_map(self) -> dict[str, int]:
        return dict(self.anchors)

    def anchor_nodes(self) -> dict[str, str]:
        return {f: self.path[p] for f, p in self.anchors}


@dataclass(frozen=True)
class Scenario:
    network: PhysicalNetwork
    demands: tuple[Demand, ...]
    catalog: NFCatalog
    sampling: Sampling = field(default_factory=Sampling)
    costs: Mapping[tuple[str, str], float] = field(default_factory=dict)
    deployment: Deployment | None = None
    routes: Mapping[int, Routing] = field(default_factory=dict)

    def cost(self, node: str, nf: str) -> float:
        return self.costs.get((node, nf), 1.0)

    def with_network(self, network: PhysicalNetwork) -> Scenario:
        return replace(self, network=network)

    def validate(self) -> None:
        net, cat = self.network, self.catalog
        net.validate()
        for n in net.nodes:
            bad = n.capabilities - cat.nfs
            if bad:
                raise ScenarioReferenceError(f"node {n.id} lists undeclared NF {sorted(bad)[0]}")
        for k, d in enumerate(self.demands):
            for end in (d.source, d.target):
                if end not in net:
                    raise ScenarioReferenceError(f"demand {k} references unknown node {end}")
            for f in d.nfs:
                if f not in cat.nfs:
                    raise ScenarioReferenceError(f"demand {k} references undeclared NF {f}")
                if not cat.pool.get(f):
                    raise ScenarioInvariantError(f"NF {f} is requested but no node can host it")
        for (i, f), c in self.costs.items():
            if i not in net or f not in cat.nfs:
                raise ScenarioReferenceError(f"cost entry ({i}, {f}) references an unknown node or NF")
            if c < 0:
                raise ScenarioInvariantError(f"cost entry ({i}, {f}) is negative")
        if self.deployment is not None:
            self.deployment.validate(cat)
        for k, r in self.routes.items():
            if not 0 <= k < len(self.demands):
                raise ScenarioReferenceError(f"route for unknown demand index {k}")
            _check_route(net, self.demands[k], r, k)


def _check_route(net: PhysicalNetwork, d: Demand, r: Routing, k: int) -> None:
    for a, b in zip(r.path, r.path[1:]):
        if a not in net or b not in net:
            raise ScenarioReferenceError(f"route {k} references an unknown node")
        if not net.graph.has_edge(a, b):
            raise ScenarioInvariantError(f"route {k}: no link {a}-{b}")
    if not r.path or r.path[0] != d.source or r.path[-1] != d.target:
        raise ScenarioInvariantError(f"route {k} does not run from {d.source} to {d.target}")
    if r.anchors:
        if not d.ordered or tuple(f for f, _ in r.anchors) != d.nfs:
            raise ScenarioInvariantError(f"route {k}: anchors must list the demand's chain in order")
        pos = [p for _, p in r.anchors]
        if pos != sorted(pos):
            raise ScenarioInvariantError(f"route {k}: anchors out of order")


def make_catalog(nodes: Iterable[NodeRecord], limits: Mapping[str, int]) -> NFCatalog:
    pool: dict[str, set[str]] = {f: set() for f in limits}
    for n in nodes:
        for f in n.capabilities:
            pool.setdefault(f, set()).add(n.id)
    return NFCatalog(frozenset(limits), {f: frozenset(v) for f, v in sorted(pool.items())}, dict(sorted(limits.items())))


# --------------------------------------------------------------------------
# parsing


@dataclass
class _Line:
    no: int
    tokens: list[tuple[str, int]]  # (token, 1-based column)

    def fail(self, idx: int, msg: str) -> ScenarioSyntaxError:
        col = self.tokens[idx][1] if idx < len(self.tokens) else (self.tokens[-1][1] + len(self.tokens[-1][0]) if self.tokens else 1)
        return ScenarioSyntaxError(self.no, col, msg)

    def arity(self, lo: int, hi: int | None = None) -> None:
        hi = lo if hi is None else hi
        n = len(self.tokens)
        if n < lo:
            raise self.fail(n, f"expected {lo} fields, found {n}")
        if n > hi:
            raise self.fail(hi, f"unexpected trailing text {self.tokens[hi][0]!r}")

    def ident(self, idx: int) -> str:
        tok = self.tokens[idx][0]
        if not _ID.match(tok):
            raise self.fail(idx, f"invalid identifier {tok!r}")
        return tok

    def number(self, idx: int) -> float:
        tok = self.tokens[idx][0]
        try:
            val = float(tok)
        except ValueError:
            raise self.fail(idx, f"expected a number, found {tok!r}") from None
        if not math.isfinite(val):
            raise self.fail(idx, f"non-finite number {tok!r}")
        return val

    def integer(self, idx: int) -> int:
        tok = self.tokens[idx][0]
        if not re.fullmatch(r"[+-]?\d+", tok):
            raise self.fail(idx, f"expected an integer, found {tok!r}")
        return int(tok)

    def flag(self, idx: int) -> bool:
        tok = self.tokens[idx][0].lower()
        if tok in _TRUE:
            return True
        if tok in _FALSE:
            return False
        raise self.fail(idx, f"expected yes/no, found {self.tokens[idx][0]!r}")

    def id_list(self, idx: int, allow_empty: bool = False) -> list[str]:
        tok = self.tokens[idx][0]
        if tok == "-" and allow_empty:
            return []
        parts = tok.split(",")
        for p in parts:
            if not _ID.match(p):
                raise self.fail(idx, f"invalid identifier {p!r} in list")
        if len(set(parts)) != len(parts):
            raise self.fail(idx, "duplicate entry in list")
        return parts


def _tokenize(text: str) -> list[tuple[str | None, _Line]]:
    out: list[tuple[str | None, _Line]] = []
    section: str | None = None
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", body)]
        if not tokens:
            continue
        first = tokens[0][0]
        if first.startswith("["):
            m = re.fullmatch(r"\[([a-z]+)\]", first)
            if not m or m.group(1) not in _SECTIONS:
                raise ScenarioSyntaxError(no, tokens[0][1], f"unknown section header {first!r}")
            if len(tokens) > 1:
                raise ScenarioSyntaxError(no, tokens[1][1], f"unexpected trailing text {tokens[1][0]!r}")
            section = m.group(1)
            continue
        if section is None:
            raise ScenarioSyntaxError(no, tokens[0][1], "record outside of any section")
        out.append((section, _Line(no, tokens)))
    return out


def parse_scenario(text: str) -> Scenario:
    """Parse and fully validate scenario text."""
    directed = False
    nodes: list[NodeRecord] = []
    edges: list[tuple[str, str, float]] = []
    limits: dict[str, int] = {}
    demands: list[Demand] = []
    costs: dict[tuple[str, str], float] = {}
    sampling: dict[str, float | int] = {}
    placement: dict[str, list[str]] | None = None
    raw_routes: list[tuple[_Line, int, list[str], list[tuple[str, str]]]] = []

    for section, ln in _tokenize(text):
        if section == "network":
            ln.arity(2)
            if ln.tokens[0][0] != "directed":
                raise ln.fail(0, f"unknown network option {ln.tokens[0][0]!r}")
            directed = ln.flag(1)
        elif section == "nodes":
            ln.arity(3)
            p = ln.number(1)
            if not 0.0 <= p <= 1.0:
                raise ln.fail(1, "failure probability outside [0, 1]")
            nodes.append(NodeRecord(ln.ident(0), p, frozenset(ln.id_list(2, allow_empty=True))))
        elif section == "edges":
            ln.arity(2, 3)
            w = ln.number(2) if len(ln.tokens) == 3 else 1.0
            if w < 0:
                raise ln.fail(2, "negative edge weight")
            edges.append((ln.ident(0), ln.ident(1), w))
        elif section == "nfs":
            ln.arity(2)
            f = ln.ident(0)
            if f in limits:
                raise ln.fail(0, f"NF {f!r} declared twice")
            lim = ln.integer(1)
            if lim < 1:
                raise ln.fail(1, "NF limit must be at least 1")
            limits[f] = lim
        elif section == "demands":
            ln.arity(4)
            try:
                demands.append(Demand(ln.ident(0), ln.ident(1), ln.flag(2), tuple(ln.id_list(3))))
            except ScenarioInvariantError as exc:
                raise ScenarioInvariantError(f"line {ln.no}: {exc}") from None
        elif section == "costs":
            ln.arity(3)
            c = ln.number(2)
            if c < 0:
                raise ln.fail(2, "negative deployment cost")
            costs[(ln.ident(0), ln.ident(1))] = c
        elif section == "sampling":
            ln.arity(2)
            key = ln.tokens[0][0]
            if key in ("mean", "variance"):
                sampling[key] = ln.number(1)
            elif key in ("samples", "seed"):
                sampling[key] = ln.integer(1)
            else:
                raise ln.fail(0, f"unknown sampling key {key!r}")
        elif section == "deployment":
            ln.arity(2)
            placement = placement or {}
            f = ln.ident(0)
            if f in placement:
                raise ln.fail(0, f"NF {f!r} deployed twice")
            placement[f] = ln.id_list(1, allow_empty=True)
        elif section == "routes":
            ln.arity(2, 3)
            idx = ln.integer(0)
            path = ln.tokens[1][0].split(",")
            for p in path:
                if not _ID.match(p):
                    raise ln.fail(1, f"invalid node id {p!r} in route")
            anchors: list[tuple[str, str]] = []
            if len(ln.tokens) == 3:
                for item in ln.tokens[2][0].split(","):
                    m = re.fullmatch(r"([A-Za-z0-9_.\-]+)@([A-Za-z0-9_.\-]+)", item)
                    if not m:
                        raise ln.fail(2, f"invalid anchor {item!r} (expected nf@node)")
                    anchors.append((m.group(1), m.group(2)))
            raw_routes.append((ln, idx, path, anchors))

    for n in nodes:
        for f in n.capabilities:
            if f not in limits:
                raise ScenarioReferenceError(f"node {n.id} lists undeclared NF {f}")
    if placement is not None:
        for f in placement:
            if f not in limits:
                raise ScenarioReferenceError(f"deployment names undeclared NF {f}")
    network = PhysicalNetwork(tuple(nodes), tuple(edges), directed)
    routes: dict[int, Routing] = {}
    for ln, idx, path, anchors in raw_routes:
        if idx in routes:
            raise ln.fail(0, f"second route for demand {idx}")
        routes[idx] = _resolve_route(ln, tuple(path), anchors)
    scen = Scenario(
        network=network,
        demands=tuple(demands),
        catalog=make_catalog(nodes, limits),
        sampling=Sampling(**sampling),  # type: ignore[arg-type]
        costs=costs,
        deployment=None if placement is None else Deployment.of(placement),
        routes=routes,
    )
    scen.validate()
    return scen


def _resolve_route(ln: _Line, path: tuple[str, ...], anchors: list[tuple[str, str]]) -> Routing:
    resolved: list[tuple[str, int]] = []
    pos = 0
    for f, node in anchors:
        try:
            pos = path.index(node, pos)
        except ValueError:
            raise ln.fail(2, f"anchor {f}@{node} does not lie on the route after the previous anchor") from None
        resolved.append((f, pos))
    return Routing(path, tuple(resolved))


def load_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() and abs(x) < 1e15 else repr(float(x))


def serialize_scenario(scen: Scenario) -> str:
    """Inverse of :func:`parse_scenario` (canonical layout)."""
    out = ["[network]", f"directed {'yes' if scen.network.directed else 'no'}", "[nodes]"]
    for n in scen.network.nodes:
        caps = ",".join(sorted(n.capabilities)) or "-"
        out.append(f"{n.id} {_fmt(n.failure_prob)} {caps}")
    out.append("[edges]")
    out += [f"{u} {v} {_fmt(w)}" for u, v, w in scen.network.edges]
    out.append("[nfs]")
    out += [f"{f} {scen.catalog.limit[f]}" for f in scen.catalog.sorted_nfs()]
    out.append("[demands]")
    out += [f"{d.source} {d.target} {'yes' if d.ordered else 'no'} {','.join(d.nfs)}" for d in scen.demands]
    if scen.costs:
        out.append("[costs]")
        out += [f"{i} {f} {_fmt(c)}" for (i, f), c in scen.costs.items()]
    s = scen.sampling
    out += ["[sampling]", f"mean {_fmt(s.mean)}", f"variance {_fmt(s.variance)}", f"samples {s.samples}", f"seed {s.seed}"]
    if scen.deployment is not None:
        out.append("[deployment]")
        for f, ns in sorted(scen.deployment.placement.items()):
            out.append(f"{f} {','.join(sorted(ns, key=node_key)) or '-'}")
    if scen.routes:
        out.append("[routes]")
        for k in sorted(scen.routes):
            r = scen.routes[k]
            line = f"{k} {','.join(r.path)}"
            if r.anchors:
                line += " " + ",".join(f"{f}@{r.path[p]}" for f, p in r.anchors)
            out.append(line)
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# built-in topologies and failure sampling

_BUILTIN = {"nsf": "nsf.scn", "coronet": "coronet.scn"}


def builtin_topology(name: str) -> PhysicalNetwork:
    """Shipped substrate: ``nsf`` (14 nodes, 21 links) or ``coronet`` (75, 99)."""
    try:
        fname = _BUILTIN[name.lower()]
    except KeyError:
        raise ScenarioError(f"unknown topology {name!r}; choose from {sorted(_BUILTIN)}") from None
    text = resources.files("robustnfv").joinpath("data", fname).read_text(encoding="utf-8")
    return parse_scenario(text).network


def builtin_scenario_text(name: str) -> str:
    return resources.files("robustnfv").joinpath("data", name).read_text(encoding="utf-8")


def _moment_quantiles(u: np.ndarray, mean: float, variance: float) -> np.ndarray:
    if variance <= 0.0:
        return np.full_like(u, mean)
    total = mean * (1.0 - mean) / variance - 1.0
    if total > 0.0:
        return stats.beta.ppf(u, mean * total, (1.0 - mean) * total)
    sd = math.sqrt(variance)
    a, b = (0.0 - mean) / sd, (1.0 - mean) / sd
    return stats.truncnorm.ppf(u, a, b, loc=mean, scale=sd)


def sample_failure_probs(network: PhysicalNetwork, mean: float, variance: float, seed: int) -> PhysicalNetwork:
    """Draw a failure probability for every NF-enabled node.

    Draws use inverse-CDF sampling of one uniform per node (in node order),
    so for a fixed seed the draws move monotonically with ``mean``.
    """
    if not 0.0 < mean < 1.0:
        raise ScenarioInvariantError(f"mean {mean} outside (0, 1)")
    if variance < 0.0:
        raise ScenarioInvariantError("variance must be nonnegative")
    enabled = [n.id for n in network.nodes if n.capabilities]
    u = np.random.default_rng(seed).random(len(enabled))
    vals = np.clip(_moment_quantiles(u, mean, variance), 0.0, 1.0)
    return network.with_failure_probs({i: float(v) for i, v in zip(enabled, vals)})
