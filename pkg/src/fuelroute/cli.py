"""Command-line entry point.

Data (JSON, CSV, LP) goes to stdout or ``--out``; diagnostics go to stderr.
Exit status: 0 success, 1 domain error, 2 usage error. A relative ``--out``
path is resolved against ``$FUELROUTE_OUT_DIR`` when that is set.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager

from . import bench
from .anneal import ReturnPolicy, SaParams, TraceRow, write_trace
from .construct import McParams
from .exact import CapExceeded, SearchLimitReached, export_mip, solve_exact
from .feasibility import (
    Solution,
    check_solution,
    dumps_solution,
    dumps_violations,
    load_solutions,
    solution_to_dict,
)
from .instance import (
    DEFAULT_CAPACITY,
    InfeasibleInstance,
    InstanceError,
    aggregate_day,
    dumps_instance,
    generate_instance,
    instance_from_dict,
    load_instance,
    validate,
)
from .solver import SolverParams, solve_day_detailed

log = logging.getLogger("fuelroute")

OUT_DIR_ENV = "FUELROUTE_OUT_DIR"


class DomainError(Exception):
    pass


@contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
        return
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        path = os.path.join(base, path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _emit(args, text: str) -> None:
    with _sink(args.out) as fh:
        fh.write(text)


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _instance(path: str):
    return load_instance(_read(path))


def _days(value: str, inst) -> list[int]:
    if value == "all":
        return list(range(1, inst.horizon_days + 1))
    day = int(value)
    if not 1 <= day <= inst.horizon_days:
        raise DomainError(f"day {day} outside horizon 1..{inst.horizon_days}")
    return [day]


def _sa_params(args) -> SaParams:
    return SaParams(
        t0=args.t0,
        t_end=args.t_end,
        enforce_windows=not args.no_window_check,
        return_policy=ReturnPolicy.FINAL_STATE if args.final_state else ReturnPolicy.BEST_SEEN,
    )


# --------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    inst = generate_instance(
        g=args.stations,
        h=args.days,
        n_requests=args.requests,
        gamma_shape=args.shape,
        gamma_scale=args.scale,
        demand_bounds=(args.min_demand, args.max_demand),
        mean_service=args.mean_service,
        geometry=(args.width, args.height),
        seed=args.seed,
        speed_kmh=args.speed,
        capacity=args.capacity,
        bound_policy=args.bound_policy,
    )
    _emit(args, dumps_instance(inst))
    return 0


def cmd_validate(args) -> int:
    raw = _read(args.instance)
    try:
        inst = instance_from_dict(json.loads(raw.decode("utf-8")))
    except (ValueError, UnicodeDecodeError) as exc:
        log.error("%s", exc)
        return 1
    findings = validate(inst)
    if findings:
        for f in findings:
            print(str(f), file=sys.stderr)
        return 1
    summary = {
        "valid": True,
        "stations": inst.n_stations,
        "horizon_days": inst.horizon_days,
        "requests": len(inst.requests),
        "total_demand_liters": round(sum(r.demand_liters for r in inst.requests), 6),
    }
    _emit(args, json.dumps(summary, indent=2) + "\n")
    return 0


def cmd_solve(args) -> int:
    inst = _instance(args.instance)
    params = SolverParams(McParams(args.trials, args.seed), _sa_params(args))
    days = _days(args.day, inst)
    solutions: list[Solution] = []
    trace: list[TraceRow] | None = [] if args.trace else None
    for d in days:
        res = solve_day_detailed(inst, d, params, jobs=args.jobs, trace=trace)
        solutions.append(res.solution)
        print(
            f"day {d}: routes={res.solution.n_routes} km={res.sa_km:.3f} mc_km={res.mc_km:.3f} "
            f"mc_ms={res.mc_ns / 1e6:.1f} sa_ms={res.sa_ns / 1e6:.1f}",
            file=sys.stderr,
        )
    if trace is not None:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            write_trace(trace, fh)
    if len(solutions) == 1:
        _emit(args, dumps_solution(solutions[0], inst))
    else:
        _emit(args, dumps_solution(solutions, inst))
    return 0


def cmd_evaluate(args) -> int:
    inst = _instance(args.instance)
    try:
        solutions = load_solutions(_read(args.solution).decode("utf-8"))
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    violations = []
    for sol in solutions:
        violations.extend(check_solution(sol, inst))
    _emit(args, dumps_violations(violations))
    if violations:
        log.error("%d violation(s)", len(violations))
        return 1
    return 0


def cmd_exact(args) -> int:
    inst = _instance(args.instance)
    docs = []
    for d in _days(args.day, inst):
        res = solve_exact(
            aggregate_day(inst, d),
            inst.matrices,
            inst.fleet,
            node_limit=args.node_limit,
            time_limit=args.time_limit,
            max_stations=args.max_stations,
            seed=args.seed,
        )
        doc = solution_to_dict(Solution(res.routes, res.optimum_km, d), inst)
        doc["proven"] = res.proven
        doc["nodes_explored"] = res.nodes_explored
        docs.append(doc)
        print(f"day {d}: optimum_km={res.optimum_km:.3f} proven={res.proven} nodes={res.nodes_explored}",
              file=sys.stderr)
    _emit(args, json.dumps(docs[0] if len(docs) == 1 else docs, indent=2) + "\n")
    return 0


def cmd_export_mip(args) -> int:
    inst = _instance(args.instance)
    (day,) = _days(args.day, inst)
    plan = aggregate_day(inst, day)
    routes = args.routes if args.routes is not None else len(plan)
    try:
        text = export_mip(plan, inst.matrices, inst.fleet, routes)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    _emit(args, text)
    return 0


def cmd_bench(args) -> int:
    if args.instance:
        inst = _instance(args.instance)
    else:
        inst = generate_instance(seed=args.seed)
    day = None if args.day == "all" else _days(args.day, inst)[0]
    sa = _sa_params(args)
    stats = bench.run_bench(inst, day, args.r, args.reps, args.seed, sa)
    if args.trajectory:
        if day is None:
            raise DomainError("--trajectory needs a single --day")
        traj = bench.trajectory(inst, day, SolverParams(McParams(max(args.r), args.seed), sa))
        with open(args.trajectory, "w", encoding="utf-8", newline="") as fh:
            bench.emit_csv(traj, fh)
    text = bench.emit_table_csv(stats) if args.format == "table" else bench.emit_csv(stats)
    _emit(args, text)
    return 0


# --------------------------------------------------------------------------
# parser


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("R levels must be positive integers")
    return values


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_sa_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t0", type=float, default=1.0, help="initial temperature (default 1)")
    p.add_argument("--t-end", type=float, default=0.001, help="final temperature (default 0.001)")
    p.add_argument("--no-window-check", action="store_true", help="do not reject deadline-violating candidates")
    p.add_argument("--final-state", action="store_true", help="return the final annealing state, not the best seen")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuelroute", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic instance")
    p.add_argument("--stations", type=_positive_int, default=65)
    p.add_argument("--days", type=_positive_int, default=3)
    p.add_argument("--requests", type=_positive_int, default=166)
    p.add_argument("--shape", type=float, default=2.0)
    p.add_argument("--scale", type=float, default=2684.5)
    p.add_argument("--min-demand", type=float, default=200.0)
    p.add_argument("--max-demand", type=float, default=15_500.0)
    p.add_argument("--mean-service", type=float, default=54.0)
    p.add_argument("--width", type=float, default=100.0, help="box width in km")
    p.add_argument("--height", type=float, default=100.0, help="box height in km")
    p.add_argument("--speed", type=float, default=60.0, help="km/h")
    p.add_argument("--capacity", type=float, default=DEFAULT_CAPACITY)
    p.add_argument("--bound-policy", choices=["clip", "resample"], default="clip")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="check an instance document")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="route one day or all days")
    p.add_argument("--instance", required=True)
    p.add_argument("--day", default="all", help="day number or 'all'")
    p.add_argument("--trials", type=_positive_int, default=1000, help="construction trials R")
    _add_sa_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes for construction trials")
    p.add_argument("--trace", help="write the annealing trace CSV here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evaluate", help="check a solution against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("exact", help="exact optimum for a small day plan")
    p.add_argument("--instance", required=True)
    p.add_argument("--day", default="1")
    p.add_argument("--max-stations", type=_positive_int, default=10)
    p.add_argument("--node-limit", type=_positive_int)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("export-mip", help="write the day's model in CPLEX-LP format")
    p.add_argument("--instance", required=True)
    p.add_argument("--day", default="1")
    p.add_argument("--routes", type=_positive_int, help="route-count bound N (default: one per station)")
    p.set_defaults(func=cmd_export_mip)

    p = sub.add_parser("bench", help="repeated-run benchmark")
    p.add_argument("--instance", help="instance file (default: generated 65-station instance, seed --seed)")
    p.add_argument("--day", default="all")
    p.add_argument("--r", type=_int_list, default=[1000, 5000, 10000], help="comma-separated R levels")
    p.add_argument("--reps", type=_positive_int, default=100)
    _add_sa_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["table", "raw"], default="table")
    p.add_argument("--trajectory", help="write one run's time/distance trajectory CSV here")
    p.set_defaults(func=cmd_bench)

    for action in sub.choices.values():
        action.add_argument("--out", help="write data here instead of stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for f in exc.findings:
            print(f"  {f}", file=sys.stderr)
        return 1
    except (InfeasibleInstance, CapExceeded, SearchLimitReached, DomainError, bench.BenchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
