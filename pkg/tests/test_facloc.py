from __future__ import annotations

import math
import random

import networkx as nx
import numpy as np
import pytest

from gen import random_fork
from robustnfv.facloc import (
    FacLocInstance,
    ForkInstance,
    InfeasibleForkError,
    MetricViolation,
    Request,
    bifactors,
    brute_force_1fl,
    brute_force_sfork,
    check_lemma_inequalities,
    convert_requests,
    forest_merge,
    greedy_1fl,
    grow_budgets,
    lift_solution,
    reduce_1sfc,
    reroute,
    solve_sfork,
    two_step_reduction,
)
from robustnfv.facloc.instance import ForkSolution
from robustnfv.netmodel import parse_scenario

BOUND = 3.27


def metric_of(g: nx.Graph) -> dict[str, dict[str, float]]:
    return {str(u): {str(v): float(w) for v, w in d.items()} for u, d in nx.all_pairs_dijkstra_path_length(g)}


def path_fork(n: int, shared, branches, pools, requests, costs=None) -> ForkInstance:
    g = nx.path_graph(range(1, n + 1))
    nx.set_edge_attributes(g, 1.0, "weight")
    costs = costs or {(i, f): 1.0 for f, ps in pools.items() for i in ps}
    return ForkInstance(tuple(shared), tuple(map(tuple, branches)), pools, costs, metric_of(g), tuple(requests))


# -- request conversion -----------------------------------------------------


def test_conversion_zero_when_endpoints_are_hosts():
    fk = path_fork(3, ["f1", "f2"], [()], {"f1": ("1",), "f2": ("3",)}, [Request("1", "3")])
    assert convert_requests(fk)[(0, "1", "3")] == 0.0


def test_conversion_hand_sum():
    # s - a - i_f1 ... i_fr - t on a unit path graph: 2 + 1
    fk = path_fork(5, ["f1", "f2"], [()], {"f1": ("3",), "f2": ("4",)}, [Request("1", "5")])
    assert convert_requests(fk)[(0, "3", "4")] == 3.0


@pytest.mark.parametrize("seed", range(10))
def test_conversion_random(seed):
    rng = random.Random(seed)
    fk = random_fork(rng, n=8, branches=1)
    table = convert_requests(fk)
    g = nx.Graph()
    for u, row in fk.dist.items():
        for v, w in row.items():
            g.add_edge(u, v, weight=w)
    for (k, a, b), val in table.items():
        r = fk.requests[k]
        expect = nx.shortest_path_length(g, r.source, a, "weight") + nx.shortest_path_length(g, b, r.target, "weight")
        assert val == pytest.approx(expect)


def test_conversion_unreachable():
    fk = ForkInstance(("f1",), ((),), {"f1": ("2",)}, {}, {"1": {"1": 0.0}, "2": {"2": 0.0}}, (Request("1", "2"),))
    with pytest.raises(InfeasibleForkError):
        convert_requests(fk)


# -- reductions --------------------------------------------------------------


@pytest.mark.parametrize("seed", range(10))
def test_chain_reduction_matches_1sfc(seed):
    rng = random.Random(seed)
    fk = random_fork(rng, n=7, branches=1)
    assert fk.is_chain
    a, b = bifactors(8.67)
    two = two_step_reduction(fk, a, b)
    one = reduce_1sfc(fk, a, b)
    assert two.facilities == one.facilities
    assert np.allclose(two.instance.C, one.instance.C) and np.allclose(two.instance.F, one.instance.F)


def test_single_candidate_reduction():
    fk = path_fork(5, ["f1", "f2"], [()], {"f1": ("2",), "f2": ("4",)}, [Request("1", "5")], {("2", "f1"): 2.0, ("4", "f2"): 3.0})
    red = two_step_reduction(fk, 1.0, 1.0)
    assert red.instance.facilities == (("2-4", 5.0),)
    assert red.instance.C[0, 0] == 1 + 2 + 1


def test_reduction_rejects_small_factors():
    fk = path_fork(3, ["f1"], [()], {"f1": ("2",)}, [Request("1", "3")])
    with pytest.raises(ValueError):
        two_step_reduction(fk, 0.5, 1.0)


@pytest.mark.parametrize("seed", range(15))
def test_two_branch_reduction_against_brute_force(seed):
    rng = random.Random(seed)
    fk = random_fork(rng, n=6, shared=1, branches=2, branch_len=(1, 1), pool=(2, 2), per_branch=2)
    opt = brute_force_sfork(fk)
    red = two_step_reduction(fk, 1.0, 1.0)
    fl = brute_force_1fl(red.instance)
    lifted = lift_solution(red, fl)
    # exact optimum <= lifted <= reduced optimum <= O* + 3 C*
    assert opt.total <= lifted.total + 1e-9
    assert lifted.total <= fl.total + 1e-9
    assert fl.total <= opt.O + 3 * opt.C + 1e-9


# -- greedy facility location ------------------------------------------------


def test_greedy_single():
    inst = FacLocInstance(("c",), (("x", 2.0),), ((3.0,),))
    sol = greedy_1fl(inst)
    assert sol.open == (0,) and sol.total == 5.0


@pytest.mark.parametrize(
    "fac, conn, expect",
    [
        ((("far", 0.5), ("near", 1.0)), ((10.0, 10.0), (0.0, 0.0)), 1.0),
        ((("far", 1.0), ("near", 20.0)), ((1.0, 1.0), (0.0, 0.0)), 3.0),
    ],
)
def test_greedy_cheap_far_vs_expensive_near(fac, conn, expect):
    inst = FacLocInstance(("a", "b"), fac, conn)
    choices = [f[1] + sum(row) for f, row in zip(fac, conn)]
    assert min(choices) == expect == brute_force_1fl(inst).total
    assert greedy_1fl(inst).total == pytest.approx(expect)


def _euclid_instance(rng: random.Random) -> FacLocInstance:
    nf, nc = rng.randint(1, 6), rng.randint(1, 10)
    fpts = [(rng.random(), rng.random()) for _ in range(nf)]
    cpts = [(rng.random(), rng.random()) for _ in range(nc)]
    conn = tuple(tuple(math.dist(f, c) * 10 for c in cpts) for f in fpts)
    return FacLocInstance(
        tuple(f"c{j}" for j in range(nc)), tuple((f"f{i}", rng.uniform(0.1, 8)) for i in range(nf)), conn
    )


def test_greedy_bound_on_metric_instances():
    rng = random.Random(42)
    for _ in range(100):
        inst = _euclid_instance(rng)
        inst.validate_metric()
        assert greedy_1fl(inst, 8.67).total <= BOUND * brute_force_1fl(inst).total + 1e-9


@pytest.mark.parametrize("seed", range(20))
def test_scaling_is_explicit_cost_multiplication(seed):
    inst = _euclid_instance(random.Random(seed))
    assert grow_budgets(inst, 8.67) == grow_budgets(inst.scaled(8.67), 1.0)


def test_metric_violation_detected():
    bad = FacLocInstance(("a", "b"), (("x", 1.0), ("y", 1.0)), ((0.0, 100.0), (0.0, 0.0)))
    with pytest.raises(MetricViolation):
        bad.validate_metric()


def test_greedy_rejects_small_delta():
    with pytest.raises(ValueError):
        greedy_1fl(FacLocInstance(("c",), (("x", 1.0),), ((1.0,),)), 0.5)


# -- SFork pipeline ----------------------------------------------------------


def test_trivial_fork_unique_solution():
    fk = path_fork(5, ["f1"], [["f2"], ["f3"]], {"f1": ("2",), "f2": ("3",), "f3": ("4",)}, [Request("1", "5", 0), Request("1", "5", 1)])
    tr = solve_sfork(fk)
    assert tr.final.paths == (("2", "3"), ("2", "4"))
    assert tr.final.total == brute_force_sfork(fk).total


@pytest.mark.parametrize("seed", range(10))
def test_chain_case_matches_1sfc_pipeline(seed):
    fk = random_fork(random.Random(seed), n=7, branches=1)
    a, b = bifactors(8.67)
    red = reduce_1sfc(fk, a, b)
    lifted = lift_solution(red, greedy_1fl(red.instance, 8.67))
    merged = min(forest_merge(reroute(lifted)), forest_merge(lifted), key=lambda s: s.total)
    assert solve_sfork(fk).final.paths == merged.paths


def test_lift_identity():
    fk = path_fork(4, ["f1"], [()], {"f1": ("2",)}, [Request("1", "4")])
    red = two_step_reduction(fk, 1.0, 1.0)
    fl = greedy_1fl(red.instance)
    lifted = lift_solution(red, fl)
    assert lifted.O == fl.facility_cost and lifted.C == fl.connection_cost


def test_lift_counts_shared_copy_once():
    # two shared sequences through the same f1 host: the copy is paid once after lifting
    pools = {"f1": ("2",), "f2": ("3", "5")}
    fk = path_fork(6, ["f1", "f2"], [()], pools, [Request("1", "4"), Request("1", "6")])
    red = two_step_reduction(fk, 1.0, 1.0)
    both = tuple(range(len(red.facilities)))
    assign = tuple(red.facilities.index(q) for q in (("2", "3"), ("2", "5")))
    from robustnfv.facloc.instance import FLSolution

    fl = FLSolution(red.instance, both, assign)
    lifted = lift_solution(red, fl)
    assert lifted.O < fl.facility_cost
    assert lifted.O == 3.0 and fl.facility_cost == 4.0


def test_brute_force_infeasible_and_guard():
    fk = ForkInstance(("f1",), ((),), {"f1": ("2",)}, {}, {"1": {"1": 0.0}, "2": {"2": 0.0}}, (Request("1", "2"),))
    with pytest.raises(InfeasibleForkError):
        brute_force_sfork(fk)
    big = random_fork(random.Random(1), n=8, pool=(4, 4), branch_len=(3, 3), shared=2, branches=2)
    with pytest.raises(RuntimeError):
        brute_force_sfork(big, guard=1000)


def test_fork_needs_nonempty_branches():
    with pytest.raises(InfeasibleForkError):
        path_fork(3, ["f1"], [["f2"], []], {"f1": ("1",), "f2": ("2",)}, [])


def test_single_branch_folds_into_chain():
    fk = path_fork(3, ["f1"], [["f2"]], {"f1": ("1",), "f2": ("2",)}, [Request("1", "3")])
    assert fk.shared == ("f1", "f2") and fk.is_chain


def test_from_scenario():
    text = """
[nodes]
1 0 f1
2 0 f2
3 0 f3
4 0 -
[edges]
1 2
2 3
3 4
4 1
[nfs]
f1 1
f2 1
f3 1
[demands]
4 2 yes f1,f2
4 3 yes f1,f3
"""
    fk = ForkInstance.from_scenario(parse_scenario(text))
    assert fk.shared == ("f1",) and sorted(fk.branches) == [("f2",), ("f3",)]
    assert [r.branch for r in fk.requests] == [fk.branches.index(("f2",)), fk.branches.index(("f3",))]


# -- lemma checks -------------------------------------------------------------


def test_lemma_trivial():
    fk = path_fork(4, ["f1"], [()], {"f1": ("2",)}, [Request("1", "4")])
    tr = solve_sfork(fk)
    rep = check_lemma_inequalities([tr], [brute_force_sfork(fk)])
    assert rep.ok and rep.checked > 0


def test_merge_of_two_paths_sharing_a_node():
    g = nx.cycle_graph(range(1, 7))
    nx.set_edge_attributes(g, 1.0, "weight")
    pools = {"f1": ("1", "4"), "f2": ("2",), "f3": ("3", "5")}
    fk = ForkInstance(("f1", "f2"), (("f3",),), pools, {}, metric_of(g), (Request("6", "3"), Request("4", "5")))
    sol = ForkSolution(fk, (("1", "2", "3"), ("4", "2", "5")))
    assert not sol.is_forest()
    merged = forest_merge(sol)
    assert merged.is_forest()
    assert merged.O <= sol.O
    assert merged.C_last == sol.C_last


def test_lemmas_on_random_forks():
    rng = random.Random(7)
    traces, others = [], []
    for _ in range(100):
        fk = random_fork(rng, n=6, pool=(1, 2), branch_len=(1, 2), per_branch=2)
        tr = solve_sfork(fk)
        traces.append(tr)
        others.append(brute_force_sfork(fk))
        assert tr.final.is_forest()
    rep = check_lemma_inequalities(traces, others)
    assert rep.ok, rep.violations[:5]


@pytest.mark.parametrize("seed", range(20))
def test_sfork_bound(seed):
    fk = random_fork(random.Random(500 + seed), n=7, pool=(1, 3), per_branch=3)
    assert solve_sfork(fk).final.total <= BOUND * brute_force_sfork(fk).total + 1e-9


def test_bifactors():
    a, b = bifactors(8.67)
    assert a == pytest.approx(1.11 + math.log(8.67)) and b == pytest.approx(1 + 0.78 / 8.67)
    assert max(a, b) < BOUND + 0.01
