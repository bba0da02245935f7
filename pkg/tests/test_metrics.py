from __future__ import annotations

import itertools
import math
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import network_from, random_scenario
from oracles import fulfilled_oracle, serving_hosts_oracle
from robustnfv.metrics import (
    ReliabilityGuardError,
    all_deployments,
    duality_report,
    exact_reliability,
    fp_demand,
    routing_rp,
    rp_demand,
    serving_positions,
    system_metrics,
    verify_duality,
)
from robustnfv.netmodel import Demand, Deployment, Routing, Scenario, make_catalog


def test_worked_rp(worked):
    rep = system_metrics(worked, worked.deployment)
    assert abs(rep.system_rp - 0.49) <= 1e-12
    assert rep.per_demand_rp[0] == pytest.approx(0.49, abs=1e-12)
    assert rep.per_demand_rp[1] == pytest.approx(0.98, abs=1e-12)
    assert rep.diagnostics == ()


def test_worked_reliability(worked):
    for k, d in enumerate(worked.demands):
        assert abs(exact_reliability(worked, worked.deployment, d, worked.routes[k]) - 0.962) <= 1e-12


def test_worked_duality(worked):
    assert verify_duality(worked, worked.deployment)
    assert verify_duality(worked, worked.deployment, exhaustive=True)


def _tiny(rho: float, ordered: bool = False, nfs=("f",)) -> Scenario:
    g = nx.path_graph([1, 2, 3])
    net = network_from(g, {2: rho}, {2: set(nfs)})
    return Scenario(net, (Demand("1", "3", ordered, tuple(nfs)),), make_catalog(net.nodes, {f: 1 for f in nfs}))


def test_single_copy():
    sc = _tiny(0.3)
    dep = Deployment.of({"f": ["2"]})
    assert rp_demand(sc, dep, 0) == pytest.approx(0.7)
    assert fp_demand(sc, dep, 0) == pytest.approx(0.3)
    assert exact_reliability(sc, dep, sc.demands[0], Routing(("1", "2", "3"))) == pytest.approx(0.7)


@pytest.mark.parametrize("ordered, expected", [(False, 1.0), (True, 1 / 6)])
def test_zero_failure(ordered, expected):
    sc = _tiny(0.0, ordered, ("a", "b", "c"))
    dep = Deployment.of({f: ["2"] for f in ("a", "b", "c")})
    assert rp_demand(sc, dep, 0) == pytest.approx(expected, abs=1e-15)


def test_one_demand_system_equals_demand():
    sc = _tiny(0.25)
    dep = Deployment.of({"f": ["2"]})
    rep = system_metrics(sc, dep)
    assert rep.system_rp == rep.per_demand_rp[0] and rep.system_fp == rep.per_demand_fp[0]


def test_infeasible_scores_zero():
    sc = _tiny(0.25)
    rep = system_metrics(sc, Deployment.of({}))
    assert rep.system_rp == 0.0 and rep.diagnostics


def test_transit_does_not_serve(worked):
    # node 5 is on d12's route but hosts neither NF in this deployment
    dep = Deployment.of({"f1": ["1"], "f2": ["2"]})
    assert rp_demand(worked, dep, 0) == pytest.approx(0.45)


def test_single_demand_single_nf_duality():
    sc = _tiny(0.4)
    assert verify_duality(sc, Deployment.of({"f": ["2"]}), exhaustive=True)


def _rp_oracle(sc: Scenario, dep: Deployment, k: int) -> float:
    """Independent evaluation over every simple path of the physical graph."""
    d = sc.demands[k]
    best = {f: 0.0 for f in d.nfs}
    for path in nx.all_simple_paths(sc.network.graph, d.source, d.target):
        hosts = serving_hosts_oracle(dep, d, path)
        for f in d.nfs:
            if hosts[f]:
                best[f] = max(best[f], 1 - math.prod(sc.network.rho(h) for h in hosts[f]))
    return min(best.values()) / (math.factorial(len(d.nfs)) if d.ordered else 1)


@pytest.mark.parametrize("seed", range(40))
def test_rp_against_path_oracle(seed):
    rng = random.Random(seed)
    sc = random_scenario(rng, n=6, nfs=("f1", "f2", "f3"), demands=2, per_demand_nfs=(1, 3), limit=3)
    deps = all_deployments(sc)
    dep = deps[rng.randrange(len(deps))]
    for k in range(len(sc.demands)):
        assert rp_demand(sc, dep, k) == pytest.approx(_rp_oracle(sc, dep, k), abs=1e-12)


@pytest.mark.parametrize("seed", range(30))
def test_duality_random(seed):
    rng = random.Random(seed)
    sc = random_scenario(rng, n=rng.randint(4, 6), demands=rng.randint(1, 3), pool_size=(1, 3), limit=2)
    rep = duality_report(sc, deployments=all_deployments(sc))
    assert rep.identity_ok and rep.optimizers_ok, rep


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_superset_never_lowers_rp(seed):
    rng = random.Random(seed)
    sc = random_scenario(rng, n=6, demands=2, limit=3)
    deps = all_deployments(sc)
    a = deps[rng.randrange(len(deps))]
    extra = {f: set(a.hosts(f)) | {i for i in sc.catalog.pool[f] if rng.random() < 0.5} for f in a.placement}
    b = Deployment.of(extra)
    for k in range(len(sc.demands)):
        assert rp_demand(sc, b, k) >= rp_demand(sc, a, k) - 1e-15


def _reliability_oracle(sc, dep, d, path) -> float:
    nodes = sorted(set(path))
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(nodes)):
        alive = {n for n, b in zip(nodes, bits) if b}
        if fulfilled_oracle(d, path, dep, alive):
            total += math.prod((1 - sc.network.rho(n)) if b else sc.network.rho(n) for n, b in zip(nodes, bits))
    return total


@pytest.mark.parametrize("seed", range(40))
def test_reliability_against_oracle(seed):
    rng = random.Random(seed)
    sc = random_scenario(rng, n=6, nfs=("f1", "f2", "f3"), demands=1, per_demand_nfs=(1, 3), limit=3)
    d = sc.demands[0]
    path = next(iter(nx.all_simple_paths(sc.network.graph, d.source, d.target)))
    full = Deployment.of({f: sc.catalog.pool[f] for f in d.nfs})
    got = exact_reliability(sc, full, d, Routing(tuple(path)))
    assert got == pytest.approx(_reliability_oracle(sc, full, d, path), abs=1e-12)
    # the metric is a lower-bound style evaluation of reliability
    hosts = serving_positions(full, d, Routing(tuple(path)))
    if all(hosts[f] for f in d.nfs):
        if d.ordered:
            chosen, cur = [], 0
            for f in d.nfs:
                cur = next(j for j in hosts[f] if j >= cur)
                chosen.append(path[cur])
        else:
            chosen = [min((path[j] for j in hosts[f]), key=sc.network.rho) for f in d.nfs]
        single = math.prod(1 - sc.network.rho(h) for h in set(chosen))
        assert got >= single - 1e-12
        assert got >= routing_rp(sc, full, d, Routing(tuple(path))) / d.factorial - 1e-12 or not d.ordered


def test_anchor_windows(worked):
    d = worked.demands[0]
    r = Routing(("1", "5", "2", "3", "2"), (("f1", 0), ("f2", 3)))
    pos = serving_positions(worked.deployment, d, r)
    assert {r.path[j] for j in pos["f1"]} == serving_hosts_oracle(worked.deployment, d, r.path, r.anchor_map)["f1"]
    assert pos["f1"] == [0, 1, 3] and pos["f2"] == [1, 2, 3, 4]


def test_reliability_guard(worked):
    with pytest.raises(ReliabilityGuardError):
        exact_reliability(worked, worked.deployment, worked.demands[0], worked.routes[0], guard=2)
