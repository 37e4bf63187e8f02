"""Per-route simulated annealing with the segment-reversal neighbourhood."""

from __future__ import annotations

import csv
import dataclasses
import enum
import math
import random
from dataclasses import dataclass
from typing import IO, Sequence

from .feasibility import Route, Solution, meets_deadlines, stops_distance
from .instance import DayPlan, Matrices
from .rng import rand_index


class Cooling(str, enum.Enum):
    INVERSE_LINEAR = "inverse_linear"


class ReturnPolicy(str, enum.Enum):
    BEST_SEEN = "best_seen"
    FINAL_STATE = "final_state"


@dataclass(frozen=True)
class SaParams:
    t0: float = 1.0
    t_end: float = 0.001
    cooling: Cooling = Cooling.INVERSE_LINEAR
    enforce_windows: bool = True
    return_policy: ReturnPolicy = ReturnPolicy.BEST_SEEN

    def __post_init__(self):
        if not 0 < self.t_end < self.t0:
            raise ValueError(f"need 0 < t_end < t0, got t0={self.t0}, t_end={self.t_end}")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    temperature: float
    energy: float
    accepted: bool
    day: int = 0
    route: int = 0


def temperature(params: SaParams, i: int) -> float:
    """Temperature used at iteration ``i`` (0-based): T_i = t0 / (i + 1)."""
    return params.t0 / (i + 1)


def temperatures(params: SaParams):
    i = 0
    t = params.t0
    while t > params.t_end:
        yield t
        i += 1
        t = temperature(params, i)


def n_iterations(params: SaParams) -> int:
    return sum(1 for _ in temperatures(params))


def _reverse_segment(stops: list, rng: random.Random) -> list:
    n = len(stops)
    if n <= 3:
        return stops
    i = rand_index(rng, n)
    j = rand_index(rng, n)
    while abs(i - j) < 2:
        j = rand_index(rng, n)
    if i > j:
        i, j = j, i
    return stops[:i] + stops[i:j][::-1] + stops[j:]


def generate(route: Route | Sequence[int], rng: random.Random):
    """Reverse a random segment between two non-adjacent positions.

    Routes of three stops or fewer come back unchanged.
    """
    if isinstance(route, Route):
        if len(route) <= 3:
            return route
        return Route(route.day, tuple(_reverse_segment(list(route.stops), rng)))
    return _reverse_segment(list(route), rng)


def accept(delta: float, t: float, rng: random.Random) -> bool:
    """Metropolis rule: downhill always, uphill with probability exp(-delta / t)."""
    if delta < 0:
        return True
    return math.exp(-delta / t) >= rng.random()


def anneal(
    route: Route,
    plan: DayPlan,
    mat: Matrices,
    params: SaParams = SaParams(),
    rng: random.Random | None = None,
    trace: list[TraceRow] | None = None,
) -> Route:
    """Anneal the visiting order of a single route.

    Energy is the route length in km. With ``enforce_windows`` a candidate
    that misses any deadline is rejected before the energy test. Under
    ``BEST_SEEN`` the shortest deadline-feasible order visited is returned,
    so the result is never longer than the input.
    """
    if rng is None:
        rng = random.Random(0)
    stops = list(route.stops)
    if len(stops) <= 3 and trace is None:
        # the neighbourhood is the identity; every policy returns the input
        return route
    dist, travel = mat.dist, mat.travel
    service, deadline = plan.service, plan.deadline
    energy = stops_distance(stops, dist)
    best, best_energy = stops, energy
    enforce = params.enforce_windows

    for i, t in enumerate(temperatures(params)):
        cand = _reverse_segment(stops, rng)
        accepted = False
        if not enforce or meets_deadlines(cand, travel, service, deadline):
            cand_energy = stops_distance(cand, dist)
            if accept(cand_energy - energy, t, rng):
                accepted = True
                stops, energy = cand, cand_energy
                if energy < best_energy and (enforce or meets_deadlines(stops, travel, service, deadline)):
                    best, best_energy = stops, energy
        if trace is not None:
            trace.append(TraceRow(i + 1, t, energy, accepted, route.day))

    final = best if params.return_policy is ReturnPolicy.BEST_SEEN else stops
    return Route(route.day, tuple(final))


def improve_solution(
    routes: Sequence[Route],
    plan: DayPlan,
    mat: Matrices,
    params: SaParams = SaParams(),
    rng: random.Random | None = None,
    trace: list[TraceRow] | None = None,
) -> Solution:
    """Anneal every route independently and assemble the day's solution.

    One 64-bit seed per route is drawn from ``rng`` up front, so each
    route's outcome does not depend on the others. When ``trace`` is given,
    every route is run through the full loop and its rows are appended.
    """
    if rng is None:
        rng = random.Random(0)
    seeds = [rng.getrandbits(64) for _ in routes]
    improved = []
    for k, (r, s) in enumerate(zip(routes, seeds)):
        rows = None if trace is None else []
        improved.append(anneal(r, plan, mat, params, random.Random(s), rows))
        if rows:
            trace.extend(dataclasses.replace(row, route=k) for row in rows)
    improved = tuple(improved)
    total = sum(stops_distance(r.stops, mat.dist) for r in improved)
    return Solution(improved, total, plan.day)


def write_trace(trace: Sequence[TraceRow], sink: IO[str]) -> None:
    w = csv.writer(sink, lineterminator="\r\n")
    w.writerow(["day", "route", "iteration", "T", "E", "accepted"])
    for row in trace:
        w.writerow([row.day, row.route, row.iteration, repr(row.temperature), repr(row.energy), int(row.accepted)])
