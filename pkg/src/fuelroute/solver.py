"""Two-stage routing pipeline: best-of-R random construction, then annealing."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .anneal import SaParams, improve_solution
from .construct import McParams, best_of
from .feasibility import Solution
from .instance import InfeasibleInstance, Instance, aggregate_day
from .rng import derive_seed, make_rng


@dataclass(frozen=True)
class SolverParams:
    mc: McParams = field(default_factory=McParams)
    sa: SaParams = field(default_factory=SaParams)


@dataclass(frozen=True)
class DayResult:
    solution: Solution
    mc_km: float
    mc_ns: int
    sa_ns: int

    @property
    def sa_km(self) -> float:
        return self.solution.total_km


def day_seed(seed: int, day: int) -> int:
    return derive_seed(seed, "day", day)


def solve_day_detailed(inst: Instance, day: int, params: SolverParams = SolverParams(), *, jobs: int = 1,
                       on_improve=None, trace=None) -> DayResult:
    """``solve_day`` plus the construction-stage distance and phase timings."""
    plan = aggregate_day(inst, day)
    seed = day_seed(params.mc.seed, day)
    t0 = time.perf_counter_ns()
    try:
        routes, mc_km = best_of(
            plan, inst.matrices, inst.fleet, McParams(params.mc.trials, seed), jobs=jobs, on_improve=on_improve
        )
    except InfeasibleInstance as exc:
        if exc.day is not None:
            raise
        raise InfeasibleInstance(f"day {day}: {exc}", day=day, station=exc.station) from exc
    t1 = time.perf_counter_ns()
    sol = improve_solution(routes, plan, inst.matrices, params.sa, make_rng(seed, "sa"), trace)
    t2 = time.perf_counter_ns()
    return DayResult(sol, mc_km, t1 - t0, t2 - t1)


def solve_day(inst: Instance, day: int, params: SolverParams = SolverParams(), *, jobs: int = 1) -> Solution:
    """Route one day of ``inst``.

    The construction stage always uses the bounded load rule (summed demand
    within capacity), regardless of ``inst.fleet.load_policy``.
    """
    return solve_day_detailed(inst, day, params, jobs=jobs).solution


def solve(inst: Instance, params: SolverParams = SolverParams(), *, jobs: int = 1) -> list[Solution]:
    """One independently solved Solution per day of the horizon."""
    return [solve_day(inst, d, params, jobs=jobs) for d in range(1, inst.horizon_days + 1)]
