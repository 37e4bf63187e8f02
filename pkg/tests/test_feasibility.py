import random

import pytest
from hypothesis import given, settings, strategies as st

from fuelroute.feasibility import (
    Route,
    Solution,
    ViolationKind,
    check_route,
    check_solution,
    dumps_solution,
    load_solutions,
    route_distance,
    schedule,
)
from fuelroute.instance import Fleet, LoadPolicy, aggregate_day

from conftest import make_instance, random_matrix
from oracles import tour_km


def kinds(violations):
    return sorted(v.kind for v in violations)


def test_single_hop_arrival(two_stop):
    plan = aggregate_day(two_stop, 1)
    assert schedule(Route(1, (1,)), plan, two_stop.matrices).arrivals == (30,)


def test_two_hop_arrival(two_stop):
    plan = aggregate_day(two_stop, 1)
    sch = schedule(Route(1, (1, 2)), plan, two_stop.matrices)
    # 30 + 54 + 20
    assert sch.arrivals == (30, 104)
    assert sch.departures == (84, 134)
    assert sch.load_before == (39_000, 19_000)


def test_schedule_rejects_foreign_stop(two_stop):
    plan = aggregate_day(two_stop, 1).subset([1])
    with pytest.raises(KeyError):
        schedule(Route(1, (1, 2)), plan, two_stop.matrices)


def test_out_and_back_distance():
    inst = make_instance([[0, 10], [10, 0]])
    assert route_distance(Route(1, (1,)), inst.matrices) == 20


def test_reversal_symmetry_on_symmetric_matrix():
    inst = make_instance(random_matrix(random.Random(3), 4))
    assert route_distance(Route(1, (1, 2, 3)), inst.matrices) == pytest.approx(
        route_distance(Route(1, (3, 2, 1)), inst.matrices)
    )


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 9))
def test_transposition_changes_distance_on_generic_matrix(seed, n):
    rng = random.Random(seed)
    inst = make_instance(random_matrix(rng, n + 1, symmetric=False))
    stops = list(range(1, n + 1))
    rng.shuffle(stops)
    base = route_distance(stops, inst.matrices)
    assert base == pytest.approx(tour_km(stops, inst.matrices.dist))
    a, b = rng.sample(range(n), 2)
    swapped = stops[:]
    swapped[a], swapped[b] = swapped[b], swapped[a]
    assert route_distance(swapped, inst.matrices) != base


@pytest.mark.parametrize("stops", [(), (1, 1), (0, 1)])
def test_route_encoding_cannot_express_broken_routes(stops):
    with pytest.raises(ValueError):
        Route(1, stops)


def test_capacity_within_bounded(two_stop):
    plan = aggregate_day(two_stop, 1)
    assert check_route(Route(1, (1, 2)), plan, two_stop.matrices, two_stop.fleet) == []


def test_full_load_flags_not_emptied(two_stop):
    plan = aggregate_day(two_stop, 1)
    v = check_route(Route(1, (1, 2)), plan, two_stop.matrices, Fleet(39_000, LoadPolicy.FULL_LOAD))
    assert kinds(v) == [ViolationKind.NOT_EMPTIED]
    assert v[0].magnitude == 1000


def test_full_load_truncates_last_delivery():
    inst = make_instance(
        [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
        requests=[(1, 1, 30_000, 5, 500), (1, 2, 15_000, 5, 500)],
        policy=LoadPolicy.FULL_LOAD,
    )
    plan = aggregate_day(inst, 1)
    assert check_route(Route(1, (1, 2)), plan, inst.matrices, inst.fleet) == []
    # only the stops before the last count against capacity
    assert check_route(Route(1, (2, 1)), plan, inst.matrices, inst.fleet) == []
    bounded = check_route(Route(1, (1, 2)), plan, inst.matrices, Fleet())
    assert kinds(bounded) == [ViolationKind.CAPACITY_EXCEEDED]
    assert bounded[0].magnitude == 6000


def test_deadline_missed_magnitude():
    inst = make_instance([[0, 310], [310, 0]], requests=[(1, 1, 100, 5, 300)])
    v = check_route(Route(1, (1,)), aggregate_day(inst, 1), inst.matrices, inst.fleet)
    assert kinds(v) == [ViolationKind.DEADLINE_MISSED]
    assert v[0].magnitude == 10


def test_wrong_day_stop(two_stop):
    plan = aggregate_day(two_stop, 1).subset([1])
    v = check_route(Route(1, (1, 2)), plan, two_stop.matrices, two_stop.fleet)
    assert kinds(v) == [ViolationKind.WRONG_DAY]


def _solution(inst, routes, day=1):
    rs = tuple(Route(day, r) for r in routes)
    return Solution(rs, sum(route_distance(r, inst.matrices) for r in rs), day)


def test_uncovered_station(two_stop):
    v = check_solution(_solution(two_stop, [(1,)]), two_stop)
    assert kinds(v) == [ViolationKind.UNCOVERED_STATION]
    assert v[0].stop == 2


def test_duplicate_across_routes(two_stop):
    v = check_solution(_solution(two_stop, [(1, 2), (2,)]), two_stop)
    assert kinds(v) == [ViolationKind.DUPLICATE_STOP]


def test_total_km_cross_check(two_stop):
    sol = _solution(two_stop, [(1, 2)])
    assert check_solution(sol, two_stop) == []
    bad = Solution(sol.routes, sol.total_km + 1, 1)
    assert kinds(check_solution(bad, two_stop)) == [ViolationKind.DISTANCE_MISMATCH]


def test_route_outside_horizon(two_stop):
    routes = (Route(1, (1, 2)), Route(5, (1,)))
    v = check_solution(Solution(routes, sum(route_distance(r, two_stop.matrices) for r in routes)), two_stop)
    assert kinds(v) == [ViolationKind.WRONG_DAY]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_bounded_capacity_is_permutation_invariant(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 7)
    dist = random_matrix(rng, n + 1)
    reqs = [(1, s, float(rng.randint(1, 12) * 1000), 10.0, 10_000.0) for s in range(1, n + 1)]
    inst = make_instance(dist, requests=reqs)
    plan = aggregate_day(inst, 1)
    stops = list(range(1, n + 1))
    base = [v.kind for v in check_route(Route(1, stops), plan, inst.matrices, inst.fleet)]
    rng.shuffle(stops)
    assert [v.kind for v in check_route(Route(1, stops), plan, inst.matrices, inst.fleet)] == base
    sch = schedule(Route(1, stops), plan, inst.matrices)
    assert all(a > b for a, b in zip(sch.arrivals[1:], sch.arrivals))
    assert all(a >= b for a, b in zip(sch.load_before, sch.load_before[1:]))
    if not base:
        assert sch.load_before[-1] >= plan.demand[stops[-1]]


def test_deadlines_are_order_sensitive():
    dist = [[0, 10, 100], [10, 0, 95], [100, 95, 0]]
    inst = make_instance(dist, requests=[(1, 1, 100, 5, 20), (1, 2, 100, 5, 500)])
    plan = aggregate_day(inst, 1)
    assert check_route(Route(1, (1, 2)), plan, inst.matrices, inst.fleet) == []
    assert kinds(check_route(Route(1, (2, 1)), plan, inst.matrices, inst.fleet)) == [ViolationKind.DEADLINE_MISSED]


def test_solution_json_round_trip(two_stop):
    sol = _solution(two_stop, [(1, 2)])
    text = dumps_solution(sol, two_stop)
    (back,) = load_solutions(text)
    assert back.routes == sol.routes and back.day == 1
    assert check_solution(back, two_stop) == []
