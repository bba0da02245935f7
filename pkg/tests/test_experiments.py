from __future__ import annotations

import csv
import io
import itertools
import math
import random

import pytest

from robustnfv import experiments as ex
from robustnfv.experiments import (
    ExperimentSpec,
    emit_outputs,
    fork_chains,
    minimum_hitting_set,
    run_experiment,
    table_csv,
    table_plot_data,
)

SMALL = dict(sweep=(0.0, 0.1, 0.3), samples=2)


@pytest.fixture(scope="module")
def reliability():
    return run_experiment(ExperimentSpec("nonchained-reliability", **SMALL))


@pytest.fixture(scope="module")
def survivability():
    return run_experiment(ExperimentSpec("sfc-survivability", topology="coronet", demand_counts=(6,), **SMALL))


def test_spec_validation():
    for bad in (dict(samples=0), dict(sweep=(1.0,)), dict(sweep=()), dict(fractions=(0.0,)), dict(target=1.0), dict(graphs=("xFork",))):
        with pytest.raises(ValueError):
            ExperimentSpec("nonchained-reliability", **bad)


def test_spec_digest_stable_and_sensitive():
    a = ExperimentSpec("sfc-survivability", seed=3)
    assert a.digest() == ExperimentSpec("sfc-survivability", seed=3).digest()
    assert a.digest() != ExperimentSpec("sfc-survivability", seed=4).digest()


def test_wrong_kind_rejected():
    with pytest.raises(ValueError):
        ex.run_sfc_experiment(ExperimentSpec("nonchained-reliability"))
    with pytest.raises(ValueError):
        ex.run_nonchained_experiment(ExperimentSpec("sfc-survivability"))


def test_zero_failure_gives_full_reliability(reliability):
    rows = [r for r in reliability.rows if r.x == 0.0]
    assert len(rows) == 3 and all(r.mean == 1.0 for r in rows)


def test_fraction_series_ordered(reliability):
    for x in SMALL["sweep"]:
        v = {r.series: r.mean for r in reliability.rows if r.x == x}
        assert v["60%"] >= v["50%"] >= v["40%"]


@pytest.mark.parametrize("sample", range(3))
def test_larger_pool_never_worse_per_instance(sample):
    spec = ExperimentSpec("nonchained-reliability", fractions=(0.2, 0.4, 0.6, 0.8), sweep=(0.3,), samples=1)
    vals = ex._nonchained_task((spec, 0.3, sample))
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_deployment_variant_is_minimal():
    spec = ExperimentSpec("nonchained-deployment", sweep=(0.3,), samples=1)
    (budget,) = ex._nonchained_task((spec, 0.3, 0))
    base, demands = ex._nonchained_base(spec)
    net = ex._with_probs(base, 0.3, spec.variance, ex._sample_seed(spec, 0))
    assert ex._nonchained_optimum(net, demands, int(budget), spec) >= spec.target
    if budget > 1:
        below = ex._nonchained_optimum(net, demands, int(budget) - 1, spec)
        assert below is None or below < spec.target


def test_sfc_zero_failure_is_factorial_scaling(survivability):
    expect = {g: 1 / math.factorial(len(fork_chains(g, 3)[0])) for g in ("1SFC", "rFork", "bFork")}
    for g, v in expect.items():
        (zero,) = [r.mean for r in survivability.rows if r.series == f"{g}/6" and r.x == 0.0]
        assert zero == pytest.approx(v, abs=1e-15)


def test_sfc_orderings(survivability):
    for x in SMALL["sweep"]:
        v = {r.series: r.mean for r in survivability.rows if r.x == x}
        assert v["1SFC/6"] >= v["rFork/6"] >= v["bFork/6"]
    for g in ("1SFC", "rFork", "bFork"):
        ys = [y for _, y in survivability.values(f"{g}/6")]
        assert all(b < a for a, b in zip(ys, ys[1:]))


def test_sfc_node_counts_hit_every_demand(survivability):
    for g in ("1SFC", "rFork", "bFork"):
        plan = ex._sfc_plan(survivability.spec, g, 6)
        (count,) = [r.mean for r in survivability.rows if r.series == f"{g}/6 nodes"]
        assert count == len(plan.hosts)
        for routes in plan.paths.values():
            assert any(set(r.path) & set(plan.hosts) for r in routes)


def test_fork_chains():
    assert fork_chains("1SFC", 3) == [("f1", "f2", "f3")]
    assert fork_chains("rFork", 2) == [("f1", "f2", "f3"), ("f1", "f4", "f5")]
    assert fork_chains("bFork", 1) == [("f1", "f2", "f3"), ("f1", "f2", "f4")]


def test_minimum_hitting_set():
    sets = [frozenset("ab"), frozenset("bc"), frozenset("cd")]
    assert len(minimum_hitting_set(sets)) == 2
    rng = random.Random(0)
    for _ in range(30):
        universe = list("abcdefg")
        sets = [frozenset(rng.sample(universe, rng.randint(1, 3))) for _ in range(rng.randint(1, 6))]
        hit = set(minimum_hitting_set(sets))
        assert all(s & hit for s in sets)
        smaller = itertools.combinations(universe, len(hit) - 1)
        assert not any(all(s & set(c) for s in sets) for c in smaller)
    with pytest.raises(ValueError):
        minimum_hitting_set([frozenset()])


def test_determinism_and_parallel_equivalence():
    spec = ExperimentSpec("nonchained-reliability", sweep=(0.2,), samples=2, seed=5)
    one = table_csv(run_experiment(spec))
    assert one == table_csv(run_experiment(spec))
    assert one == table_csv(run_experiment(spec, jobs=2))


def test_csv_round_trip(reliability):
    text = table_csv(reliability)
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    assert list(rows[0]) == ["x", "series", "mean", "std", "samples", "infeasible"]
    assert len(rows) == len(reliability.rows)
    for got, r in zip(rows, reliability.rows):
        assert (float(got["x"]), got["series"], float(got["mean"]), int(got["samples"])) == (r.x, r.series, r.mean, r.samples)
    assert f"spec={reliability.spec.digest()}" in text


def test_plot_data(reliability):
    lines = table_plot_data(reliability).splitlines()
    assert lines[0].startswith("#")
    assert all(len(ln.split("\t")) == 3 for ln in lines[1:])


def test_emit_outputs(tmp_path, reliability):
    paths = emit_outputs(reliability, tmp_path)
    stem = f"nonchained-reliability-{reliability.spec.digest()[:12]}"
    assert [p.name for p in paths] == [f"{stem}.csv", f"{stem}.dat"]
    assert paths[0].read_text() == table_csv(reliability)
    with pytest.raises(ValueError):
        emit_outputs(reliability, tmp_path, ("png",))
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_outputs(reliability, blocker)
