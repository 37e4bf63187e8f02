"""Route schedules, constraint checks and objective evaluation.

All solvers share these semantics. A route is the ordered list of stations
between two implicit hub visits; the vehicle leaves the hub at t = 0 full,
never waits, and every arrival must not exceed the station's deadline.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .instance import (
    DEFAULT_CAPACITY,
    DayPlan,
    Fleet,
    Instance,
    LoadPolicy,
    Matrices,
    aggregate_day,
)

# relative slack for capacity sums, which depend on summation order
CAPACITY_TOL = 1e-9
DISTANCE_TOL = 1e-6


class ViolationKind(str, enum.Enum):
    DEADLINE_MISSED = "deadline_missed"
    CAPACITY_EXCEEDED = "capacity_exceeded"
    NOT_EMPTIED = "not_emptied"
    DUPLICATE_STOP = "duplicate_stop"
    UNCOVERED_STATION = "uncovered_station"
    WRONG_DAY = "wrong_day"
    DISTANCE_MISMATCH = "distance_mismatch"


@dataclass(frozen=True)
class Route:
    day: int
    stops: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "stops", tuple(int(s) for s in self.stops))
        if not self.stops:
            raise ValueError("a route must visit at least one station")
        if len(set(self.stops)) != len(self.stops):
            raise ValueError(f"station repeated within route {self.stops}")
        if 0 in self.stops:
            raise ValueError("the depot is implicit and cannot appear among the stops")

    def __len__(self) -> int:
        return len(self.stops)


@dataclass(frozen=True)
class Schedule:
    arrivals: tuple[float, ...]
    departures: tuple[float, ...]
    load_before: tuple[float, ...]


@dataclass(frozen=True)
class Solution:
    routes: tuple[Route, ...]
    total_km: float
    day: int | None = None

    @property
    def n_routes(self) -> int:
        return len(self.routes)


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    day: int | None
    route: int | None
    stop: int | None
    magnitude: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "day": self.day,
            "route": self.route,
            "stop": self.stop,
            "magnitude": self.magnitude,
        }


def arrival_times(stops: Sequence[int], travel, service: Mapping[int, float]) -> list[float]:
    """Arrival time at each stop; departure from the hub is at t = 0."""
    out = []
    t = 0.0
    prev = 0
    for s in stops:
        t = t + travel[prev][s]
        out.append(t)
        t = t + service[s]
        prev = s
    return out


def meets_deadlines(stops: Sequence[int], travel, service: Mapping[int, float], deadline: Mapping[int, float]) -> bool:
    t = 0.0
    prev = 0
    for s in stops:
        t = t + travel[prev][s]
        if t > deadline[s]:
            return False
        t = t + service[s]
        prev = s
    return True


def stops_distance(stops: Sequence[int], dist) -> float:
    """Hub -> stops -> hub distance for a bare stop sequence."""
    if not stops:
        return 0.0
    total = dist[0][stops[0]]
    prev = stops[0]
    for s in stops[1:]:
        total += dist[prev][s]
        prev = s
    return total + dist[prev][0]


def schedule(route: Route, plan: DayPlan, mat: Matrices, capacity: float = DEFAULT_CAPACITY) -> Schedule:
    missing = [s for s in route.stops if s not in plan.demand]
    if missing:
        raise KeyError(f"stops {missing} have no demand on day {plan.day}")
    arrivals = arrival_times(route.stops, mat.travel, plan.service)
    departures = [a + plan.service[s] for a, s in zip(arrivals, route.stops)]
    loads = []
    load = capacity
    for s in route.stops:
        loads.append(load)
        load -= plan.demand[s]
    return Schedule(tuple(arrivals), tuple(departures), tuple(loads))


def route_distance(route: Route | Sequence[int], mat: Matrices) -> float:
    stops = route.stops if isinstance(route, Route) else route
    return stops_distance(stops, mat.dist)


def solution_distance(routes: Iterable[Route | Sequence[int]], mat: Matrices) -> float:
    return sum(route_distance(r, mat) for r in routes)


def check_route(
    route: Route,
    plan: DayPlan,
    mat: Matrices,
    fleet: Fleet,
    route_index: int | None = None,
) -> list[Violation]:
    """Deadline and load checks for one route.

    Under ``LoadPolicy.BOUNDED`` the summed demand must not exceed the
    capacity. Under ``FULL_LOAD`` the demand of all stops but the last must
    fit, and the full route demand must reach the capacity so the tank is
    emptied at the last stop (whose delivery is truncated to what is left).
    """
    day = plan.day
    out: list[Violation] = []
    missing = [s for s in route.stops if s not in plan.demand]
    if route.day != plan.day or missing:
        for s in missing or route.stops:
            out.append(Violation(ViolationKind.WRONG_DAY, route.day, route_index, s, 1.0))
        return out

    for s, y in zip(route.stops, arrival_times(route.stops, mat.travel, plan.service)):
        late = y - plan.deadline[s]
        if late > 0:
            out.append(Violation(ViolationKind.DEADLINE_MISSED, day, route_index, s, late))

    cap = fleet.capacity_liters
    tol = CAPACITY_TOL * cap
    demands = [plan.demand[s] for s in route.stops]
    total = math.fsum(demands)
    if fleet.load_policy is LoadPolicy.BOUNDED:
        if total > cap + tol:
            out.append(Violation(ViolationKind.CAPACITY_EXCEEDED, day, route_index, route.stops[-1], total - cap))
    else:
        head = math.fsum(demands[:-1])
        if head > cap + tol:
            out.append(Violation(ViolationKind.CAPACITY_EXCEEDED, day, route_index, route.stops[-2], head - cap))
        if total < cap - tol:
            out.append(Violation(ViolationKind.NOT_EMPTIED, day, route_index, route.stops[-1], cap - total))
    return out


def check_solution(sol: Solution, inst: Instance) -> list[Violation]:
    """Per-route checks plus coverage, partition and total-distance checks.

    Coverage is checked for ``sol.day`` when set, otherwise for every day
    of the horizon.
    """
    out: list[Violation] = []
    days = [sol.day] if sol.day is not None else list(range(1, inst.horizon_days + 1))
    plans: dict[int, DayPlan] = {}
    for d in days:
        if 1 <= d <= inst.horizon_days:
            plans[d] = aggregate_day(inst, d)

    seen: dict[int, dict[int, int]] = {d: {} for d in plans}
    for k, route in enumerate(sol.routes):
        plan = plans.get(route.day)
        if plan is None:
            for s in route.stops:
                out.append(Violation(ViolationKind.WRONG_DAY, route.day, k, s, 1.0))
            continue
        out.extend(check_route(route, plan, inst.matrices, inst.fleet, k))
        for s in route.stops:
            if s in seen[route.day]:
                out.append(Violation(ViolationKind.DUPLICATE_STOP, route.day, k, s, 1.0))
            else:
                seen[route.day][s] = k

    for d, plan in plans.items():
        for s in plan.stations:
            if s not in seen[d]:
                out.append(Violation(ViolationKind.UNCOVERED_STATION, d, None, s, plan.demand[s]))

    actual = solution_distance(sol.routes, inst.matrices)
    if abs(actual - sol.total_km) > DISTANCE_TOL * max(1.0, abs(actual)):
        out.append(Violation(ViolationKind.DISTANCE_MISMATCH, sol.day, None, None, abs(actual - sol.total_km)))
    return out


# --------------------------------------------------------------------------
# JSON


def solution_to_dict(sol: Solution, inst: Instance) -> dict:
    routes = []
    plans: dict[int, DayPlan] = {}
    for r in sol.routes:
        if r.day not in plans:
            plans[r.day] = aggregate_day(inst, r.day)
        arrivals = arrival_times(r.stops, inst.matrices.travel, plans[r.day].service)
        routes.append(
            {
                "day": r.day,
                "stops": list(r.stops),
                "km": round(route_distance(r, inst.matrices), 6),
                "arrivals": [round(a, 6) for a in arrivals],
            }
        )
    doc = {"day": sol.day, "routes": routes, "total_km": round(sol.total_km, 6)}
    if sol.day is None:
        del doc["day"]
    return doc


def dumps_solution(sol: Solution | Sequence[Solution], inst: Instance) -> str:
    if isinstance(sol, Solution):
        return json.dumps(solution_to_dict(sol, inst), indent=2) + "\n"
    return json.dumps([solution_to_dict(s, inst) for s in sol], indent=2) + "\n"


def solution_from_dict(doc: Mapping) -> Solution:
    """Rebuild a Solution; per-route ``km`` and ``arrivals`` are ignored."""
    try:
        routes = tuple(Route(int(r["day"]), tuple(r["stops"])) for r in doc["routes"])
        total = float(doc["total_km"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed solution document: {exc}") from exc
    day = doc.get("day")
    return Solution(routes, total, None if day is None else int(day))


def load_solutions(text: str) -> list[Solution]:
    doc = json.loads(text)
    if isinstance(doc, list):
        return [solution_from_dict(d) for d in doc]
    return [solution_from_dict(doc)]


def dumps_violations(violations: Sequence[Violation]) -> str:
    return json.dumps([v.to_dict() for v in violations], indent=2) + "\n"
