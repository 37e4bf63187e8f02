"""Monte-Carlo route construction.

``initial`` builds one random feasible route set: stations are drawn
uniformly from those not yet routed and appended to the open route when
the arrival meets the deadline and the load still fits. ``best_of`` keeps
the shortest of R independent draws.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

from .feasibility import Route, stops_distance
from .instance import DayPlan, Fleet, InfeasibleInstance, Matrices
from .rng import make_rng, rand_index


@dataclass(frozen=True)
class McParams:
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


def check_stations(plan: DayPlan, mat: Matrices, fleet: Fleet) -> None:
    """Raise InfeasibleInstance if some station cannot open a route on its own."""
    for s in plan.stations:
        if plan.demand[s] > fleet.capacity_liters:
            raise InfeasibleInstance(
                f"day {plan.day}: demand {plan.demand[s]} at station {s} exceeds capacity {fleet.capacity_liters}",
                day=plan.day,
                station=s,
            )
        if mat.travel[0][s] > plan.deadline[s]:
            raise InfeasibleInstance(
                f"day {plan.day}: station {s} unreachable before its deadline "
                f"({mat.travel[0][s]} > {plan.deadline[s]})",
                day=plan.day,
                station=s,
            )


def _draw(stations, travel, demand, service, deadline, cap, rng: random.Random) -> list[list[int]]:
    omega = list(stations)
    routes = []
    while omega:
        route: list[int] = []
        volume = 0.0
        clock = 0.0
        last = 0
        # stations not yet tried for this route; a rejected one stays in omega
        pool = omega[:]
        while volume < cap and pool:
            k = rand_index(rng, len(pool))
            j = pool[k]
            pool[k] = pool[-1]
            pool.pop()
            arrival = clock + travel[last][j]
            if arrival <= deadline[j] and volume + demand[j] <= cap:
                route.append(j)
                omega.remove(j)
                volume += demand[j]
                clock = arrival + service[j]
                last = j
        if not route:
            raise InfeasibleInstance("no remaining station can start a route")
        routes.append(route)
    return routes


def initial(plan: DayPlan, mat: Matrices, fleet: Fleet, rng: random.Random) -> list[Route]:
    """One random feasible partition of the day's stations into routes."""
    check_stations(plan, mat, fleet)
    raw = _draw(
        plan.stations, mat.travel, plan.demand, plan.service, plan.deadline, fleet.capacity_liters, rng
    )
    return [Route(plan.day, tuple(r)) for r in raw]


def _best_range(plan: DayPlan, mat: Matrices, cap: float, seed: int, start: int, stop: int, on_improve=None):
    dist = mat.dist
    args = (plan.stations, mat.travel, plan.demand, plan.service, plan.deadline, cap)
    best = None
    best_km = float("inf")
    best_trial = -1
    for trial in range(start, stop):
        routes = _draw(*args, make_rng(seed, trial))
        km = sum(stops_distance(r, dist) for r in routes)
        if km < best_km:
            best, best_km, best_trial = routes, km, trial
            if on_improve is not None:
                on_improve(trial, km)
    return best_km, best_trial, best


def best_of(
    plan: DayPlan,
    mat: Matrices,
    fleet: Fleet,
    params: McParams,
    *,
    jobs: int = 1,
    on_improve: Callable[[int, float], None] | None = None,
) -> tuple[list[Route], float]:
    """Shortest of ``params.trials`` independent ``initial`` draws.

    Trial ``i`` draws from the sub-stream ``(seed, i)``, so a run with R
    trials evaluates exactly the first R trials of any longer run. Ties go
    to the earliest trial regardless of ``jobs``. ``on_improve(trial, km)``
    fires on each new incumbent (sequential mode only).
    """
    check_stations(plan, mat, fleet)
    if not plan.stations:
        return [], 0.0
    cap = fleet.capacity_liters
    n = params.trials
    if jobs <= 1 or n < 2 * jobs or on_improve is not None:
        km, _, raw = _best_range(plan, mat, cap, params.seed, 0, n, on_improve)
    else:
        bounds = [n * k // jobs for k in range(jobs + 1)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_best_range, plan, mat, cap, params.seed, bounds[k], bounds[k + 1])
                for k in range(jobs)
            ]
            results = [f.result() for f in futures]
        km, _, raw = min(results, key=lambda r: (r[0], r[1]))
    return [Route(plan.day, tuple(r)) for r in raw], km
