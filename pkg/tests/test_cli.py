from __future__ import annotations

import csv
import io
import math

import pytest

from robustnfv.cli import build_parser, main
from robustnfv.metrics import system_metrics
from robustnfv.milp import build_nonchained_model, candidate_routings, export_lp

FORK = """
[nodes]
1 0.1 f1
2 0.1 f2
3 0.1 f3
4 0.1 -
5 0.1 f2,f3
[edges]
1 2
2 3
3 4
4 1
4 5
5 2
[nfs]
f1 1
f2 2
f3 2
[demands]
4 2 yes f1,f2
4 3 yes f1,f3
"""

BIG_FORK = """
[nodes]
1 0.1 f1,f2,f3
2 0.1 f1,f2,f3
3 0.1 f1,f2,f3
4 0.1 f1,f2,f3
5 0.1 f1,f2,f3
6 0.1 f1,f2,f3
[edges]
1 2
2 3
3 4
4 5
5 6
6 1
[nfs]
f1 6
f2 6
f3 6
[demands]
1 4 yes f1,f2
1 5 yes f1,f3
"""

SPLIT = """
[nodes]
1 0.1 f1
2 0.1 -
3 0.1 f2
[edges]
1 2
2 3
3 1
[nfs]
f1 1
f2 1
[demands]
1 3 no f1,f2
"""


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, text, name="s.scn"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_version_and_help(capsys):
    assert run(capsys, "--version")[0] == 0
    assert run(capsys, "--help")[0] == 0


def test_path_line_format(capsys):
    code, out, _ = run(capsys, "--scenario", "builtin:example", "path", "--demand", "0")
    assert code == 0
    seq, weight, bottleneck, prob = out.strip().split(" | ")
    assert seq.startswith("1-") and seq.endswith("-2")
    assert float(weight) >= 0 and 0 <= float(prob) <= 1 and float(bottleneck) > 0


def test_path_k_lists_sorted(capsys):
    code, out, _ = run(capsys, "path", "--scenario", "builtin:example", "--demand", "1", "--k", "4")
    assert code == 0
    weights = [float(ln.split(" | ")[1]) for ln in out.strip().splitlines()]
    assert len(weights) == 4 and weights == sorted(weights)


def test_path_robust(capsys):
    plain = run(capsys, "--scenario", "builtin:example", "path")[1]
    robust = run(capsys, "--scenario", "builtin:example", "path", "--robust")[1]
    assert float(robust.split(" | ")[2]) >= float(plain.split(" | ")[2])


def test_metrics_csv(capsys, worked):
    code, out, _ = run(capsys, "--scenario", "builtin:example", "metrics")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["demand", "rp", "fp", "reliability"]
    rep = system_metrics(worked, worked.deployment)
    assert rows[-1][:3] == ["system", repr(rep.system_rp), repr(rep.system_fp)]
    assert float(rows[1][1]) == pytest.approx(0.49)


def test_metrics_to_out_dir(capsys, tmp_path):
    code, out, _ = run(capsys, "--scenario", "builtin:example", "--out", str(tmp_path), "metrics")
    assert code == 0 and (tmp_path / "metrics.csv").read_text().startswith("demand,rp")


def test_metrics_needs_deployment(capsys, tmp_path):
    assert run(capsys, "--scenario", write(tmp_path, SPLIT), "metrics")[0] == 2


def test_sfork_with_oracle(capsys, tmp_path):
    code, out, _ = run(capsys, "--scenario", write(tmp_path, FORK), "sfork", "--fork", "f1|f2|f3", "--oracle")
    assert code == 0
    rows = [r for r in csv.reader(io.StringIO(out)) if r and not r[0].startswith("#")]
    assert rows[0] == ["solution", "open", "connect", "total", "ratio"]
    assert 1.0 - 1e-12 <= float(rows[2][4]) <= 3.27
    assert out.count("# request") == 2


def test_sfork_mismatched_fork(capsys, tmp_path):
    assert run(capsys, "--scenario", write(tmp_path, FORK), "sfork", "--fork", "f1|f3|f9")[0] == 2
    assert run(capsys, "--scenario", write(tmp_path, FORK), "sfork", "--fork", "nonsense")[0] == 2


def test_sfork_oracle_guard(capsys, tmp_path):
    assert run(capsys, "--scenario", write(tmp_path, BIG_FORK), "sfork", "--oracle")[0] == 3


def test_milp_solve_and_export(capsys, tmp_path, worked):
    lp = tmp_path / "m.lp"
    code, out, _ = run(capsys, "--scenario", "builtin:example", "milp", "--solve", "--export", str(lp), "--k", "10")
    assert code == 0
    obj = float(next(ln for ln in out.splitlines() if ln.startswith("# objective")).split()[2])
    assert obj == pytest.approx(math.log(1.1), abs=1e-12)
    from dataclasses import replace

    only = replace(worked, demands=(worked.demands[1],), routes={}, deployment=None)
    assert lp.read_text() == export_lp(build_nonchained_model(only, candidate_routings(only, 10), "paper"))


def test_milp_sfc_mode(capsys):
    code, out, _ = run(capsys, "--scenario", "builtin:example", "milp", "--mode", "sfc", "--log", "faithful", "--solve")
    assert code == 0 and "# deploy f1" in out


def test_milp_build_only(capsys):
    code, out, _ = run(capsys, "--scenario", "builtin:example", "milp")
    assert code == 0 and out.startswith("model robust_nonchained")


def test_milp_infeasible(capsys, tmp_path):
    # two NFs on distinct nodes but room for one NF-enabled node only
    assert run(capsys, "--scenario", write(tmp_path, SPLIT), "milp", "--solve")[0] == 1


def test_milp_wrong_mode(capsys, tmp_path):
    assert run(capsys, "--scenario", write(tmp_path, SPLIT), "milp", "--mode", "sfc")[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["metrics"],
        ["--scenario", "/nonexistent/x.scn", "metrics"],
        ["--scenario", "builtin:nope", "metrics"],
        ["--scenario", "builtin:example", "path", "--demand", "7"],
        ["bogus"],
        ["experiment", "nonchained-reliability", "--sweep", "1.5"],
        ["experiment", "nonchained-reliability", "--sweep", "a,b"],
    ],
)
def test_input_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_parse_error_reports_location(capsys, tmp_path):
    code, _, err = run(capsys, "--scenario", write(tmp_path, "[nodes]\n1 2.5 f1\n"), "metrics")
    assert code == 2 and "line 2" in err


def test_global_flags_after_subcommand():
    args = build_parser().parse_args(["metrics", "--seed", "4", "--jobs", "2"])
    assert (args.seed, args.jobs) == (4, 2)
    args = build_parser().parse_args(["--seed", "4", "metrics"])
    assert args.seed == 4


def test_experiment_csv_is_reproducible(capsys, tmp_path):
    argv = ["experiment", "sfc-survivability", "--sweep", "0.1,0.3", "--samples", "2", "--demand-counts", "6", "--seed", "2"]
    files = []
    for sub in ("a", "b"):
        code, out, _ = run(capsys, *argv, "--out", str(tmp_path / sub))
        assert code == 0
        files.append([ln for ln in out.splitlines() if ln.endswith(".csv")][0])
    first, second = (open(f, "rb").read() for f in files)
    assert first == second
    assert files[0].rsplit("/", 1)[1] == files[1].rsplit("/", 1)[1]
