"""Command-line entry point.

Exit codes: 0 success, 1 infeasible, 2 input error, 3 guard exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from collections.abc import Sequence
from pathlib import Path

from . import __version__
from .auxnet import AuxConstructionError
from .experiments import ExperimentSpec, emit_outputs, run_experiment
from .facloc import ForkInstance, InfeasibleForkError, brute_force_sfork, solve_sfork
from .facloc.solve import DEFAULT_DELTA
from .metrics import ReliabilityGuardError, exact_reliability, system_metrics
from .milp import (
    ModelError,
    build_nonchained_model,
    build_sfc_model,
    candidate_routings,
    export_lp,
    extract_solution,
    solve_exact,
)
from .netmodel import Scenario, ScenarioError, builtin_scenario_text, parse_scenario
from .pathfind import NoServicePathError, PathExplosionError, k_shortest_service_paths, robust_sfc_path, service_aux, sfc_shortest_path

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _load(args: argparse.Namespace) -> Scenario:
    if not args.scenario:
        raise CliError(EXIT_INPUT, "this command needs --scenario <file> (or builtin:example)")
    if args.scenario.startswith("builtin:"):
        name = args.scenario.split(":", 1)[1]
        try:
            text = builtin_scenario_text(f"{name}.scn")
        except FileNotFoundError:
            raise CliError(EXIT_INPUT, f"no builtin scenario {name!r}") from None
    else:
        try:
            text = Path(args.scenario).read_text(encoding="utf-8")
        except OSError as exc:
            raise CliError(EXIT_INPUT, f"cannot read {args.scenario}: {exc.strerror}") from None
    scen = parse_scenario(text)
    scen.validate()
    return scen


def _emit(args: argparse.Namespace, name: str, text: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text, encoding="utf-8")
        print(out / name)
    else:
        sys.stdout.write(text)


def _csv(rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _demand(scen: Scenario, idx: int):
    if not 0 <= idx < len(scen.demands):
        raise CliError(EXIT_INPUT, f"demand index {idx} out of range (0..{len(scen.demands) - 1})")
    return scen.demands[idx]


# --------------------------------------------------------------------------
# subcommands


def cmd_path(args: argparse.Namespace) -> int:
    scen = _load(args)
    d = _demand(scen, args.demand)
    aux = service_aux(scen, d)
    if args.k:
        paths = k_shortest_service_paths(aux, d.source, d.target, args.k)
        if not paths:
            raise NoServicePathError(f"no service path for demand {d.label}")
    else:
        paths = [(robust_sfc_path if args.robust else sfc_shortest_path)(aux, d.source, d.target)]
    lines = [
        f"{'-'.join(p.physical)} | {p.total_weight:.12g} | {p.bottleneck:.12g} | {p.survivable_prob(scen.network):.12g}\n"
        for p in paths
    ]
    _emit(args, "path.txt", "".join(lines))
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    scen = _load(args)
    if scen.deployment is None:
        raise CliError(EXIT_INPUT, "scenario has no [deployment] section")
    rep = system_metrics(scen, scen.deployment)
    rows: list[list[object]] = [["demand", "rp", "fp", "reliability"]]
    for k, d in enumerate(scen.demands):
        rel = ""
        if k in scen.routes:
            rel = repr(exact_reliability(scen, scen.deployment, d, scen.routes[k]))
        rows.append([k, repr(rep.per_demand_rp[k]), repr(rep.per_demand_fp[k]), rel])
    rows.append(["system", repr(rep.system_rp), repr(rep.system_fp), ""])
    _emit(args, "metrics.csv", _csv(rows))
    for line in rep.diagnostics:
        print(f"warning: {line}", file=sys.stderr)
    return EXIT_OK


def _parse_fork(text: str) -> tuple[tuple[str, ...], tuple[tuple[str, ...], ...]]:
    parts = [tuple(p.split(",")) if p else () for p in text.split("|")]
    if not parts[0] or any("" in p for p in parts):
        raise CliError(EXIT_INPUT, f"bad fork description {text!r}; expected shared|branch|branch with comma-separated NFs")
    return parts[0], tuple(parts[1:]) or ((),)


def cmd_sfork(args: argparse.Namespace) -> int:
    scen = _load(args)
    fork = ForkInstance.from_scenario(scen)
    if args.fork:
        shared, branches = _parse_fork(args.fork)
        unknown = sorted({f for f in shared + tuple(f for b in branches for f in b)} - set(fork.pools))
        if unknown:
            raise CliError(EXIT_INPUT, f"fork {args.fork!r} names NFs the scenario does not request: {', '.join(unknown)}")
        want = ForkInstance(shared, branches, fork.pools, fork.open_cost, fork.dist, ())
        if (want.shared, sorted(want.branches)) != (fork.shared, sorted(fork.branches)):
            raise CliError(EXIT_INPUT, f"fork {args.fork!r} does not match the scenario demands")
    trace = solve_sfork(fork, args.delta)
    sol = trace.final
    rows: list[list[object]] = [["solution", "open", "connect", "total", "ratio"]]
    rows.append(["approx", repr(sol.O), repr(sol.C), repr(sol.total), ""])
    if args.oracle:
        try:
            opt = brute_force_sfork(fork)
        except RuntimeError as exc:
            raise CliError(EXIT_GUARD, str(exc)) from None
        rows.append(["optimum", repr(opt.O), repr(opt.C), repr(opt.total), repr(sol.total / opt.total if opt.total else 1.0)])
    text = _csv(rows)
    for k, p in enumerate(sol.paths):
        text += f"# request {k}: {'-'.join(p)}\n"
    _emit(args, "sfork.csv", text)
    return EXIT_OK


def cmd_milp(args: argparse.Namespace) -> int:
    scen = _load(args)
    wanted = args.mode == "sfc"
    kept = tuple(d for d in scen.demands if d.ordered == wanted)
    if not kept:
        raise CliError(EXIT_INPUT, f"scenario has no {'ordered' if wanted else 'unordered'} demands")
    scen = Scenario(scen.network, kept, scen.catalog, scen.sampling, scen.costs)
    cands = candidate_routings(scen, args.k)
    build = build_sfc_model if wanted else build_nonchained_model
    model = build(scen, cands, args.log)
    print(f"model {model.name}: {len(model.variables)} variables, {len(model.constraints)} constraints")
    if args.export:
        Path(args.export).write_text(export_lp(model), encoding="utf-8")
        print(f"wrote {args.export}")
    if not args.solve:
        return EXIT_OK
    res = solve_exact(model, guard=args.guard)
    if res.status == "guard-exceeded":
        raise CliError(EXIT_GUARD, res.message)
    if res.status == "infeasible":
        print(f"infeasible: {res.message}")
        return EXIT_INFEASIBLE
    dep, routing, rep = extract_solution(res, scen, model)
    rows: list[list[object]] = [["demand", "route", "rp"]]
    for k in sorted(routing):
        rows.append([k, "-".join(routing[k].path), repr(rep.per_demand_rp[k])])
    text = f"# objective {res.objective!r} via {res.method}\n"
    text += "".join(f"# deploy {f} {','.join(sorted(h))}\n" for f, h in dep.placement.items())
    _emit(args, "milp.csv", text + _csv(rows))
    return EXIT_OK


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_experiment(args: argparse.Namespace) -> int:
    topo = args.topology or ("coronet" if args.kind == "sfc-survivability" else "nsf")
    kw = dict(kind=args.kind, topology=topo, seed=args.seed, log_mode=args.log, k=args.k, chain_length=args.chain_length)
    if args.desk:
        kw.update(sweep=(0.01, 0.1, 0.2, 0.35, 0.5), samples=5)
    if args.sweep is not None:
        kw["sweep"] = args.sweep
    if args.samples is not None:
        kw["samples"] = args.samples
    if args.fractions is not None:
        kw["fractions"] = args.fractions
    if args.target is not None:
        kw["target"] = args.target
    if args.demand_counts is not None:
        kw["demand_counts"] = args.demand_counts
    if args.graphs is not None:
        kw["graphs"] = tuple(args.graphs.split(","))
    spec = ExperimentSpec(**kw)
    table = run_experiment(spec, jobs=args.jobs)
    for path in emit_outputs(table, args.out or "."):
        print(path)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _globals(p: argparse.ArgumentParser, top: bool) -> None:
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--scenario", default=d(None), help="scenario file, or builtin:<name>")
    p.add_argument("--seed", type=int, default=d(0), help="random seed")
    p.add_argument("--out", default=d(None), help="output directory (default: stdout / current directory)")
    p.add_argument("--jobs", type=int, default=d(1), help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robustnfv", description="Robust NF provisioning toolkit.")
    ap.add_argument("--version", action="version", version=__version__)
    _globals(ap, True)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("path", help="shortest or robust SFC path for one demand")
    _globals(p, False)
    p.add_argument("--demand", type=int, default=0)
    p.add_argument("--robust", action="store_true", help="maximize the bottleneck capacity")
    p.add_argument("--k", type=int, default=0, help="list the k shortest service paths instead")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("metrics", help="RP/FP per demand for the scenario deployment")
    _globals(p, False)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("sfork", help="approximate SFC-Fork provisioning")
    _globals(p, False)
    p.add_argument("--fork", help="shared|branch|branch, NFs comma-separated (checked against demands)")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--oracle", action="store_true", help="also brute-force the optimum and print the ratio")
    p.set_defaults(func=cmd_sfork)

    p = sub.add_parser("milp", help="build, export and solve the provisioning MILP")
    _globals(p, False)
    p.add_argument("--mode", choices=("nonchained", "sfc"), default="nonchained")
    p.add_argument("--log", choices=("paper", "faithful"), default="paper")
    p.add_argument("--k", type=int, default=10, help="candidate paths per demand")
    p.add_argument("--export", help="write the model as an LP file")
    p.add_argument("--solve", action="store_true")
    p.add_argument("--guard", type=int, default=40, help="branching-binary limit for branch and bound")
    p.set_defaults(func=cmd_milp)

    p = sub.add_parser("experiment", help="run an experiment protocol and write CSV/plot data")
    _globals(p, False)
    p.add_argument("kind", choices=("nonchained-reliability", "nonchained-deployment", "sfc-survivability"))
    p.add_argument("--topology", choices=("nsf", "coronet"))
    p.add_argument("--desk", action="store_true", help="5 sweep points x 5 samples")
    p.add_argument("--sweep", type=_floats, help="failure-probability means, comma-separated")
    p.add_argument("--samples", type=int)
    p.add_argument("--fractions", type=_floats)
    p.add_argument("--target", type=float)
    p.add_argument("--demand-counts", type=_ints)
    p.add_argument("--graphs", help="comma-separated subset of 1SFC,rFork,bFork")
    p.add_argument("--chain-length", type=int, default=3)
    p.add_argument("--log", choices=("paper", "faithful"), default="faithful")
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InfeasibleForkError, NoServicePathError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (PathExplosionError, ReliabilityGuardError) as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ScenarioError, ModelError, AuxConstructionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
