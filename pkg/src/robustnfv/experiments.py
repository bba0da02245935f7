"""Experiment protocols: non-chained reliability sweeps and SFC survivability.

Every sample draws node failure probabilities by inverse-CDF sampling from a
fixed per-sample uniform vector, so the same sample index sees
monotonically shifted draws across sweep points (common random numbers).
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import random
import statistics
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Literal

from .metrics import system_metrics
from .milp import build_nonchained_model, candidate_routings, extract_solution, solve_exact
from .netmodel import (
    Demand,
    Deployment,
    PhysicalNetwork,
    Routing,
    Scenario,
    builtin_topology,
    make_catalog,
    node_key,
    sample_failure_probs,
)
from .pathfind import k_shortest_candidate_paths

__all__ = [
    "FORWARDING_GRAPHS",
    "NSF_DEMANDS",
    "ExperimentSpec",
    "ResultRow",
    "ResultTable",
    "build_id",
    "emit_outputs",
    "fork_chains",
    "minimum_hitting_set",
    "run_experiment",
    "run_nonchained_experiment",
    "run_sfc_experiment",
    "table_csv",
    "table_plot_data",
]

Kind = Literal["nonchained-reliability", "nonchained-deployment", "sfc-survivability"]
NSF_DEMANDS = (("1", "2"), ("1", "4"), ("2", "3"), ("3", "5"), ("4", "7"), ("6", "7"))
FORWARDING_GRAPHS = ("1SFC", "rFork", "bFork")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: Kind
    topology: str = "nsf"
    demands: tuple[tuple[str, str], ...] = ()
    sweep: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    fractions: tuple[float, ...] = (0.4, 0.5, 0.6)
    target: float = 0.9
    samples: int = 25
    seed: int = 0
    variance: float = 0.001
    nf_types: int = 4
    max_nfs: int = 3
    k: int = 5
    log_mode: Literal["paper", "faithful"] = "faithful"
    graphs: tuple[str, ...] = FORWARDING_GRAPHS
    demand_counts: tuple[int, ...] = (6, 10)
    chain_length: int = 3

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if not self.sweep or any(not 0.0 <= x < 1.0 for x in self.sweep):
            raise ValueError("sweep values must lie in [0, 1)")
        if any(not 0.0 < x <= 1.0 for x in self.fractions):
            raise ValueError("pool fractions must lie in (0, 1]")
        if not 0.0 < self.target < 1.0:
            raise ValueError("target reliability must lie in (0, 1)")
        if self.chain_length < 1 or self.k < 1 or self.nf_types < 1 or self.max_nfs < 1:
            raise ValueError("chain length, k, nf_types and max_nfs must be positive")
        unknown = set(self.graphs) - set(FORWARDING_GRAPHS)
        if unknown:
            raise ValueError(f"unknown forwarding graph {sorted(unknown)[0]}")

    def digest(self) -> str:
        text = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class ResultRow:
    x: float
    series: str
    mean: float
    std: float
    samples: int
    infeasible: int = 0


@dataclass
class ResultTable:
    spec: ExperimentSpec
    rows: list[ResultRow] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def series(self) -> list[str]:
        return list(dict.fromkeys(r.series for r in self.rows))

    def values(self, series: str) -> list[tuple[float, float]]:
        return [(r.x, r.mean) for r in self.rows if r.series == series]


def build_id() -> str:
    """Content hash of the installed package sources (stable across runs)."""
    h = hashlib.sha256()
    root = resources.files("robustnfv")
    for p in sorted(Path(str(root)).rglob("*.py")):
        h.update(p.relative_to(Path(str(root))).as_posix().encode())
        h.update(p.read_bytes())
    return h.hexdigest()[:12]


def _with_probs(net: PhysicalNetwork, mean: float, variance: float, seed: int) -> PhysicalNetwork:
    if mean == 0.0:
        return net.with_failure_probs({n.id: 0.0 for n in net.nodes if n.capabilities})
    return sample_failure_probs(net, mean, variance, seed)


def _sample_seed(spec: ExperimentSpec, sample: int) -> int:
    return spec.seed * 100_003 + sample


def _map(fn, tasks: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _row(x: float, series: str, vals: Sequence[float | None]) -> ResultRow:
    ok = [v for v in vals if v is not None]
    mean = statistics.fmean(ok) if ok else math.nan
    std = statistics.pstdev(ok) if len(ok) > 1 else 0.0
    return ResultRow(x, series, mean, std, len(ok), len(vals) - len(ok))


# --------------------------------------------------------------------------
# non-chained protocol


def _nonchained_base(spec: ExperimentSpec) -> tuple[PhysicalNetwork, tuple[Demand, ...]]:
    net = builtin_topology(spec.topology)
    nfs = [f"f{i + 1}" for i in range(spec.nf_types)]
    net = net.with_capabilities({n.id: nfs for n in net.nodes})
    rng = random.Random(spec.seed)
    pairs = spec.demands or NSF_DEMANDS
    demands = []
    for s, t in pairs:
        size = rng.randint(1, min(spec.max_nfs, len(nfs)))
        demands.append(Demand(s, t, False, tuple(sorted(rng.sample(nfs, size)))))
    return net, tuple(demands)


def _nonchained_optimum(net: PhysicalNetwork, demands: tuple[Demand, ...], budget: int, spec: ExperimentSpec) -> float | None:
    used = sorted({f for d in demands for f in d.nfs})
    scen = Scenario(net, demands, make_catalog(net.nodes, {f: budget for f in used}))
    cands = candidate_routings(scen, spec.k)
    model = build_nonchained_model(scen, cands, spec.log_mode)
    res = solve_exact(model)
    if res.status != "optimal":
        return None
    _, _, report = extract_solution(res, scen, model)
    return report.system_rp


def _nonchained_task(args: tuple[ExperimentSpec, float, int]) -> list[float | None]:
    spec, mean, sample = args
    base, demands = _nonchained_base(spec)
    net = _with_probs(base, mean, spec.variance, _sample_seed(spec, sample))
    n = len(net.nodes)
    if spec.kind == "nonchained-reliability":
        return [_nonchained_optimum(net, demands, max(1, round(fr * n)), spec) for fr in spec.fractions]
    for budget in range(1, n + 1):
        rp = _nonchained_optimum(net, demands, budget, spec)
        if rp is not None and rp >= spec.target:
            return [float(budget)]
    return [None]


def run_nonchained_experiment(spec: ExperimentSpec, jobs: int = 1) -> ResultTable:
    """Optimal system RP per pool fraction, or the smallest node budget reaching the target."""
    if spec.kind not in ("nonchained-reliability", "nonchained-deployment"):
        raise ValueError(f"{spec.kind} is not a non-chained experiment")
    tasks = [(spec, x, s) for x in spec.sweep for s in range(spec.samples)]
    out = _map(_nonchained_task, tasks, jobs)
    table = ResultTable(spec)
    labels = (
        [f"{round(fr * 100)}%" for fr in spec.fractions]
        if spec.kind == "nonchained-reliability"
        else [f"target {spec.target:g}"]
    )
    for i, x in enumerate(spec.sweep):
        block = out[i * spec.samples : (i + 1) * spec.samples]
        for j, label in enumerate(labels):
            table.rows.append(_row(x, label, [b[j] for b in block]))
    _, demands = _nonchained_base(spec)
    table.notes.append("demands " + " ".join(f"{d.label}:{'+'.join(d.nfs)}" for d in demands))
    return table


# --------------------------------------------------------------------------
# SFC protocol


def fork_chains(graph: str, length: int) -> list[tuple[str, ...]]:
    """Root-to-leaf NF chains of a named forwarding graph.

    1SFC is one chain of ``length`` NFs; rFork branches right after the
    root into two chains of ``length`` further NFs; bFork shares two NFs
    before branching.
    """
    if graph == "1SFC":
        return [tuple(f"f{i + 1}" for i in range(length))]
    shared = 1 if graph == "rFork" else 2
    head = tuple(f"f{i + 1}" for i in range(shared))
    a = tuple(f"f{shared + i + 1}" for i in range(length))
    b = tuple(f"f{shared + length + i + 1}" for i in range(length))
    return [head + a, head + b]


def _sfc_pairs(net: PhysicalNetwork, count: int, seed: int) -> list[tuple[str, str, str]]:
    rng = random.Random(seed)
    ids = sorted(net.node_ids, key=node_key)
    return [tuple(rng.sample(ids, 3)) for _ in range(count)]  # type: ignore[misc]


def minimum_hitting_set(sets: Sequence[frozenset[str]]) -> tuple[str, ...]:
    """Smallest node set meeting every given set (first in natural order on ties)."""
    sets = [s for s in dict.fromkeys(sets)]
    if any(not s for s in sets):
        raise ValueError("an empty candidate set cannot be hit")
    universe = sorted(set().union(*sets), key=node_key) if sets else []
    for size in range(len(universe) + 1):
        for combo in itertools.combinations(universe, size):
            chosen = set(combo)
            if all(s & chosen for s in sets):
                return combo
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class _SfcPlan:
    scenario: Scenario
    paths: dict[int, list[Routing]]
    hosts: tuple[str, ...]


@lru_cache(maxsize=64)
def _sfc_plan(spec: ExperimentSpec, graph: str, count: int) -> _SfcPlan:
    base = builtin_topology(spec.topology)
    chains = fork_chains(graph, spec.chain_length)
    demands: list[Demand] = []
    for s, t1, t2 in _sfc_pairs(base, count, spec.seed):
        for chain, t in zip(chains, (t1, t2)):
            demands.append(Demand(s, t, True, chain))
    routes = {
        k: [Routing(p) for p in k_shortest_candidate_paths(base, d.source, d.target, spec.k)] for k, d in enumerate(demands)
    }
    # one NF-enabled node on a candidate route serves a whole chain
    hosts = minimum_hitting_set([frozenset(n for r in routes[k] for n in r.path) for k in range(len(demands))])
    nfs = sorted({f for c in chains for f in c})
    net = base.with_capabilities({h: nfs for h in hosts})
    cat = make_catalog(net.nodes, {f: len(hosts) for f in nfs})
    dep = Deployment.of({f: hosts for f in nfs})
    return _SfcPlan(Scenario(net, tuple(demands), cat, deployment=dep), routes, hosts)


def _sfc_task(args: tuple[ExperimentSpec, str, int, float, int]) -> float:
    spec, graph, count, mean, sample = args
    plan = _sfc_plan(spec, graph, count)
    scen = plan.scenario
    net = _with_probs(scen.network, mean, spec.variance, _sample_seed(spec, sample))
    scen = scen.with_network(net)
    assert scen.deployment is not None
    return system_metrics(scen, scen.deployment, plan.paths).system_rp


def run_sfc_experiment(spec: ExperimentSpec, jobs: int = 1) -> ResultTable:
    """Minimum NF-enabled node count and survivable probability per forwarding graph."""
    if spec.kind != "sfc-survivability":
        raise ValueError(f"{spec.kind} is not an SFC experiment")
    table = ResultTable(spec)
    combos = [(g, c) for c in spec.demand_counts for g in spec.graphs]
    for g, c in combos:
        plan = _sfc_plan(spec, g, c)
        table.rows.append(ResultRow(0.0, f"{g}/{c} nodes", float(len(plan.hosts)), 0.0, 1))
        table.notes.append(f"{g}/{c} hosts " + ",".join(plan.hosts))
    tasks = [(spec, g, c, x, s) for g, c in combos for x in spec.sweep for s in range(spec.samples)]
    out = _map(_sfc_task, tasks, jobs)
    it = iter(out)
    for g, c in combos:
        for x in spec.sweep:
            table.rows.append(_row(x, f"{g}/{c}", [next(it) for _ in range(spec.samples)]))
    return table


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> ResultTable:
    if spec.kind == "sfc-survivability":
        return run_sfc_experiment(spec, jobs)
    return run_nonchained_experiment(spec, jobs)


# --------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def table_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    buf.write(f"# kind={table.spec.kind} topology={table.spec.topology} seed={table.spec.seed}\n")
    buf.write(f"# build={build_id()} spec={table.spec.digest()}\n")
    for note in table.notes:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "series", "mean", "std", "samples", "infeasible"])
    for r in table.rows:
        w.writerow([_fmt(r.x), r.series, _fmt(r.mean), _fmt(r.std), r.samples, r.infeasible])
    return buf.getvalue()


def table_plot_data(table: ResultTable) -> str:
    lines = ["# x\tseries\ty"]
    lines += [f"{_fmt(r.x)}\t{r.series}\t{_fmt(r.mean)}" for r in table.rows]
    return "\n".join(lines) + "\n"


def emit_outputs(table: ResultTable, out_dir: str | Path, formats: Sequence[str] = ("csv", "dat")) -> list[Path]:
    """Write the table as CSV and/or tab-separated plot data named after the spec hash."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{table.spec.kind}-{table.spec.digest()[:12]}"
    written = []
    for fmt in formats:
        if fmt == "csv":
            text = table_csv(table)
        elif fmt == "dat":
            text = table_plot_data(table)
        else:
            raise ValueError(f"unknown output format {fmt!r}")
        path = out / f"{stem}.{fmt}"
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
