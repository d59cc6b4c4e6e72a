"""Command-line interface.

Subcommands:
  run              adaptive model/grid control on a network file
  simulate         integrate a single pipe and emit an x/pressure CSV
  estimate         per-pipe error estimates for a stored solution
  validate-params  check the finite-termination parameter inequalities
  nlp-solve        one NLP solve at a fixed uniform level/grid

Exit codes: 0 success, 2 infeasible problem, 1 any other error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import fileio, nlp
from .controller import AdaptiveConfig, compute_estimates, run, validate_parameters
from .errors import GasAdaptError, InfeasibleProblem
from .integrate import Grid, integrate
from .models import ModelLevel
from .network import GasParameters, Pipe

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gasadapt",
        description="Adaptive model and discretization error control for "
        "stationary gas network operation-cost minimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser(
        "run", help="adaptive control loop; writes solution, trace, estimates"
    )
    p_run.add_argument("--network", required=True)
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--config", help="JSON config; defaults otherwise")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--quiet", action="store_true")

    p_sim = sub.add_parser("simulate", help="single-pipe integration to CSV")
    p_sim.add_argument("--level", type=int, default=3, choices=(1, 2, 3))
    p_sim.add_argument("--h", type=float, help="stepsize [m]; default L/100")
    p_sim.add_argument("--p0", type=float, default=60e5, help="inlet pressure [Pa]")
    p_sim.add_argument("--q", type=float, default=100.0, help="mass flow [kg/s]")
    p_sim.add_argument("--length", type=float, default=10000.0)
    p_sim.add_argument("--diameter", type=float, default=0.6)
    p_sim.add_argument("--friction", type=float, default=0.01)
    p_sim.add_argument("--slope", type=float, default=0.0)
    p_sim.add_argument("--out", help="CSV path; stdout when omitted")

    p_est = sub.add_parser(
        "estimate", help="per-pipe error estimates for a solution file"
    )
    p_est.add_argument("--network", required=True)
    p_est.add_argument("--solution", required=True)
    p_est.add_argument("--level", type=int, default=3, choices=(1, 2, 3),
                       help="fallback level when the solution has no pipe states")
    p_est.add_argument("--intervals", type=int, default=4,
                       help="fallback interval count (multiple of 4)")
    p_est.add_argument("--out", help="CSV path; stdout when omitted")

    p_val = sub.add_parser(
        "validate-params", help="check the finite-termination inequalities"
    )
    p_val.add_argument("--config", help="JSON config; defaults otherwise")
    group = p_val.add_mutually_exclusive_group(required=True)
    group.add_argument("--n-pipes", type=int)
    group.add_argument("--network")

    p_nlp = sub.add_parser(
        "nlp-solve", help="one NLP solve at a fixed uniform level and grid"
    )
    p_nlp.add_argument("--network", required=True)
    p_nlp.add_argument("--scenario", required=True)
    p_nlp.add_argument("--level", type=int, default=1, choices=(1, 2, 3))
    p_nlp.add_argument("--intervals", type=int, default=4,
                       help="intervals per pipe (multiple of 4)")
    p_nlp.add_argument("--eps-opt", type=float, default=nlp.DEFAULT_EPS_OPT)
    p_nlp.add_argument("--out", help="solution JSON path; stdout when omitted")

    return parser


def _cmd_run(args) -> int:
    net, gas = fileio.load_network(args.network)
    scn = fileio.load_scenario(args.scenario)
    config = fileio.load_config(args.config) if args.config else AdaptiveConfig()

    for warning in validate_parameters(config, len(net.pipes)):
        print(f"warning: {warning}", file=sys.stderr)

    progress = None
    if not args.quiet:
        def progress(record):
            print(
                f"solve {record.solve_index}: outer {record.outer_k} "
                f"inner {record.inner_j} avg_eta {record.avg_eta:.6g} Pa "
                f"(+{record.n_refined} refined, +{record.n_switched_up} up)",
                file=sys.stderr,
            )

    sol, state = run(net, scn, gas, config, progress=progress)

    os.makedirs(args.out, exist_ok=True)
    pipe_states = {
        pid: (state.levels[pid], state.stepsizes[pid]) for pid in net.pipes
    }
    fileio.save_solution(sol, os.path.join(args.out, "solution.json"), pipe_states)
    fileio.export_trace(state, os.path.join(args.out, "trace.csv"))
    fileio.export_estimates(
        state.estimates.values(), os.path.join(args.out, "estimates.csv")
    )
    if not args.quiet:
        print(
            f"eps-feasible after {len(state.trace)} solves; "
            f"objective {sol.objective:.6g}",
            file=sys.stderr,
        )
    return EXIT_OK


def _cmd_simulate(args) -> int:
    pipe = Pipe(
        id="pipe",
        from_node="a",
        to_node="b",
        length=args.length,
        diameter=args.diameter,
        friction=args.friction,
    )
    gas = GasParameters()
    h = args.h if args.h is not None else args.length / 100.0
    n = round(args.length / h)
    grid = Grid(h, n)
    profile = integrate(
        ModelLevel.of(args.level), pipe, gas, args.p0, args.q, grid, args.slope
    )
    fileio.export_profile(profile, args.out if args.out else sys.stdout)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    net, gas = fileio.load_network(args.network)
    sol, pipe_states = fileio.load_solution(args.solution)
    if pipe_states is None:
        pipe_states = {
            pid: (ModelLevel.of(args.level), p.length / args.intervals)
            for pid, p in net.pipes.items()
        }
    levels = {pid: lv for pid, (lv, _) in pipe_states.items()}
    stepsizes = {pid: h for pid, (_, h) in pipe_states.items()}
    estimates, _ = compute_estimates(net, gas, sol, levels, stepsizes)
    fileio.export_estimates(
        estimates.values(), args.out if args.out else sys.stdout
    )
    return EXIT_OK


def _cmd_validate_params(args) -> int:
    config = fileio.load_config(args.config) if args.config else AdaptiveConfig()
    if args.network is not None:
        net, _ = fileio.load_network(args.network)
        n_pipes = len(net.pipes)
    else:
        n_pipes = args.n_pipes
    warnings = validate_parameters(config, n_pipes)
    for warning in warnings:
        print(f"warning: {warning}")
    if not warnings:
        print("ok: both finite-termination inequalities hold")
    return EXIT_OK


def _cmd_nlp_solve(args) -> int:
    net, gas = fileio.load_network(args.network)
    scn = fileio.load_scenario(args.scenario)
    state = {
        pid: (ModelLevel.of(args.level), p.length / args.intervals)
        for pid, p in net.pipes.items()
    }
    instance = nlp.assemble(net, scn, gas, state)
    sol = nlp.solve(instance, eps_opt=args.eps_opt)
    doc = fileio.solution_to_dict(sol, state)
    if args.out:
        with open(args.out, "w") as handle:
            json.dump(doc, handle, indent=2, sort_keys=True)
            handle.write("\n")
    else:
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    if sol.status == nlp.STATUS_INFEASIBLE:
        print("infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    if sol.status != nlp.STATUS_OPTIMAL:
        print(f"error: solver stopped with status {sol.status}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "validate-params": _cmd_validate_params,
    "nlp-solve": _cmd_nlp_solve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InfeasibleProblem as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except GasAdaptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
