"""Exact optimum for small day plans and an LP-format model exporter.

``solve_exact`` runs a depth-first branch and bound directly over route
sets: routes are built one stop at a time and emitted in increasing order
of their first stop, so each route set is enumerated once. ``export_mip``
writes the arc-based mixed-integer model for external solvers.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from typing import Callable

from .construct import check_stations, initial
from .feasibility import Route, stops_distance
from .instance import DayPlan, Fleet, InfeasibleInstance, LoadPolicy, Matrices, fmt_num

DEFAULT_MAX_STATIONS = 10


class CapExceeded(ValueError):
    pass


class SearchLimitReached(RuntimeError):
    """Limits hit before any feasible route set was found."""


@dataclass(frozen=True)
class ExactResult:
    optimum_km: float
    routes: tuple[Route, ...]
    nodes_explored: int
    proven: bool


def solve_exact(
    plan: DayPlan,
    mat: Matrices,
    fleet: Fleet = Fleet(),
    *,
    node_limit: int | None = None,
    time_limit: float | None = None,
    max_stations: int = DEFAULT_MAX_STATIONS,
    warm_start: bool = True,
    seed: int = 0,
    on_incumbent: Callable[[int, float], None] | None = None,
) -> ExactResult:
    """Minimum total distance over all feasible route sets of ``plan``.

    Nodes are pruned when the partial distance plus a lower bound on the
    arcs still to be added reaches the incumbent, or when a deadline or the
    load rule of ``fleet.load_policy`` fails. ``proven`` is true when the
    search finished within ``node_limit`` / ``time_limit`` (seconds).
    Under the bounded rule the incumbent is seeded from one random
    construction. ``on_incumbent(elapsed_ns, km)`` reports improvements.
    """
    if len(plan) > max_stations:
        raise CapExceeded(f"{len(plan)} stations exceed the exact-search cap of {max_stations}")
    check_stations(plan, mat, fleet)
    started = time.perf_counter_ns()
    if not plan.stations:
        return ExactResult(0.0, (), 1, True)

    dist, travel = mat.dist, mat.travel
    q, svc, due = plan.demand, plan.service, plan.deadline
    cap = fleet.capacity_liters
    full_load = fleet.load_policy is LoadPolicy.FULL_LOAD
    tol = 1e-9 * cap
    stations = plan.stations
    nodes = (0,) + stations
    # cheapest arc into each station, over every possible predecessor
    min_in = {j: min(dist[i][j] for i in nodes if i != j) for j in stations}

    best_km = math.inf
    best_routes: list[list[int]] | None = None
    explored = 0
    aborted = False
    deadline_ns = None if time_limit is None else started + int(time_limit * 1e9)

    def offer(routes: list[list[int]], km: float) -> None:
        nonlocal best_km, best_routes
        if km < best_km - 1e-9 * max(1.0, km):
            best_km = km
            best_routes = [list(r) for r in routes]
            if on_incumbent is not None:
                on_incumbent(time.perf_counter_ns() - started, km)

    if warm_start and not full_load:
        raw = [list(r.stops) for r in initial(plan, mat, fleet, random.Random(seed))]
        offer(raw, sum(stops_distance(r, dist) for r in raw))

    done: list[list[int]] = []

    def search(cur: list[int], left: set[int], partial: float, volume: float, clock: float) -> None:
        nonlocal explored, aborted
        if aborted:
            return
        explored += 1
        if (node_limit is not None and explored > node_limit) or (
            deadline_ns is not None and explored % 256 == 0 and time.perf_counter_ns() > deadline_ns
        ):
            aborted = True
            return
        last = cur[-1]
        back = min([dist[last][0]] + [dist[j][0] for j in left])
        if partial + back + sum(min_in[j] for j in left) >= best_km - 1e-9 * max(1.0, best_km):
            return

        # extend the open route
        may_extend = volume <= cap + tol if full_load else True
        if may_extend:
            for j in sorted(left, key=lambda j: (dist[last][j], j)):
                if not full_load and volume + q[j] > cap:
                    continue
                arrival = clock + travel[last][j]
                if arrival > due[j]:
                    continue
                cur.append(j)
                left.discard(j)
                search(cur, left, partial + dist[last][j], volume + q[j], arrival + svc[j])
                left.add(j)
                cur.pop()

        # close it
        if full_load and volume < cap - tol:
            return
        closed = partial + dist[last][0]
        if not left:
            offer(done + [cur], closed)
            return
        done.append(list(cur))
        first = cur[0]
        for f in sorted(j for j in left if j > first):
            if travel[0][f] > due[f]:
                continue
            left.discard(f)
            search([f], left, closed + dist[0][f], q[f], travel[0][f] + svc[f])
            left.add(f)
        done.pop()

    everything = set(stations)
    for f in stations:
        if travel[0][f] > due[f]:
            continue
        everything.discard(f)
        search([f], everything, dist[0][f], q[f], travel[0][f] + svc[f])
        everything.add(f)
        if aborted:
            break

    if best_routes is None:
        if aborted:
            raise SearchLimitReached("search limits reached before a feasible route set was found")
        raise InfeasibleInstance(f"day {plan.day}: no route set satisfies deadlines and load rules", day=plan.day)
    routes = tuple(Route(plan.day, tuple(r)) for r in sorted(best_routes))
    return ExactResult(best_km, routes, explored, not aborted)


# --------------------------------------------------------------------------
# LP export


def big_m(plan: DayPlan, mat: Matrices) -> float:
    """max deadline + max service + max travel time + 1 over the plan's nodes."""
    nodes = (0,) + plan.stations
    max_t = max(mat.travel[i][j] for i in nodes for j in nodes)
    max_s = max(plan.service[s] for s in plan.stations)
    max_u = max(plan.deadline[s] for s in plan.stations)
    return max_u + max_s + max_t + 1


def _wrap(terms: list[str], per_line: int = 6) -> str:
    lines = [" ".join(terms[k:k + per_line]) for k in range(0, len(terms), per_line)]
    return "\n   ".join(lines)


def _sum(coefs: list[tuple[float, str]]) -> str:
    terms = []
    for k, (c, name) in enumerate(coefs):
        sign = "-" if c < 0 else "+"
        body = f"{fmt_num(abs(c))} {name}" if abs(c) != 1 else name
        terms.append(body if k == 0 and sign == "+" else f"{sign} {body}")
    return _wrap(terms)


def export_mip(plan: DayPlan, mat: Matrices, fleet: Fleet, route_bound: int) -> str:
    """CPLEX-LP text of the arc model for one day plan.

    Node 0 is the hub as origin, nodes 1..m are the plan's stations in
    ascending id order and node m+1 is the hub as destination. Variables
    are ``x_n_i_j`` (route n uses arc i->j) and ``y_n_j`` (arrival time).
    Besides the route-shape, timing and load constraints the model carries
    a visit-once constraint per station.
    """
    if not plan.stations:
        raise ValueError("empty day plan")
    cap = fleet.capacity_liters
    need = math.ceil(plan.total_demand / cap - 1e-12)
    if route_bound < need:
        raise ValueError(f"route bound {route_bound} below the {need} routes the demand requires")

    st = plan.stations
    m = len(st)
    end = m + 1
    node = {0: 0, end: 0, **{k + 1: s for k, s in enumerate(st)}}
    srv = {0: 0.0, **{k + 1: plan.service[s] for k, s in enumerate(st)}}
    dem = {k + 1: plan.demand[s] for k, s in enumerate(st)}
    due = {k + 1: plan.deadline[s] for k, s in enumerate(st)}
    big = big_m(plan, mat)
    routes = range(1, route_bound + 1)
    arcs = [(i, j) for i in range(0, m + 1) for j in range(1, end + 1) if i != j]

    def x(n, i, j):
        return f"x_{n}_{i}_{j}"

    out = [
        "\\ fuel delivery routing model",
        f"\\ day {plan.day}, load policy {fleet.load_policy.value}, route bound {route_bound}",
        "\\ nodes: 0 = hub (start), " + ", ".join(f"{k + 1} = station {s}" for k, s in enumerate(st))
        + f", {end} = hub (end)",
        f"\\ big-M = {fmt_num(big)}",
        "Minimize",
        " obj: " + _sum([(mat.dist[node[i]][node[j]], x(n, i, j)) for n in routes for i, j in arcs]),
        "Subject To",
    ]
    for n in routes:
        out.append(f" start_{n}: " + _sum([(1, x(n, 0, j)) for j in range(1, end + 1)]) + " = 1")
        out.append(f" end_{n}: " + _sum([(1, x(n, i, end)) for i in range(0, m + 1)]) + " = 1")
        for i in range(1, m + 1):
            inflow = [(1, x(n, j, i)) for j in range(0, m + 1) if j != i]
            outflow = [(-1, x(n, i, j)) for j in range(1, end + 1) if j != i]
            out.append(f" flow_{n}_{i}: " + _sum(inflow + outflow) + " = 0")
    for i in range(1, m + 1):
        out.append(
            f" visit_{i}: " + _sum([(1, x(n, j, i)) for n in routes for j in range(0, m + 1) if j != i]) + " = 1"
        )
    for n in routes:
        for i, j in arcs:
            rhs = big - srv[i] - mat.travel[node[i]][node[j]]
            out.append(
                f" time_{n}_{i}_{j}: y_{n}_{i} - y_{n}_{j} + {fmt_num(big)} {x(n, i, j)} <= {fmt_num(rhs)}"
            )
    for n in routes:
        every = [(dem[i], x(n, i, j)) for i in range(1, m + 1) for j in range(1, end + 1) if j != i]
        if fleet.load_policy is LoadPolicy.BOUNDED:
            out.append(f" load_{n}: " + _sum(every) + f" <= {fmt_num(cap)}")
        else:
            head = [(dem[i], x(n, i, j)) for i in range(1, m + 1) for j in range(1, m + 1) if j != i]
            if head:  # a single-station plan has no station-to-station arcs
                out.append(f" load_{n}: " + _sum(head) + f" <= {fmt_num(cap)}")
            out.append(f" empty_{n}: " + _sum(every) + f" >= {fmt_num(cap)}")
    out.append("Bounds")
    for n in routes:
        out.append(f" y_{n}_0 = 0")
        for j in range(1, m + 1):
            out.append(f" 0 <= y_{n}_{j} <= {fmt_num(due[j])}")
        out.append(f" y_{n}_{end} >= 0")
    out.append("Binary")
    names = [x(n, i, j) for n in routes for i, j in arcs]
    for k in range(0, len(names), 8):
        out.append(" " + " ".join(names[k:k + 8]))
    out.append("End")
    return "\n".join(out) + "\n"
