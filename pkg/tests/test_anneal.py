import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from fuelroute.anneal import (
    ReturnPolicy,
    SaParams,
    TraceRow,
    accept,
    anneal,
    generate,
    improve_solution,
    n_iterations,
    temperatures,
    write_trace,
)
from fuelroute.feasibility import Route, check_route, route_distance
from fuelroute.instance import aggregate_day

from conftest import make_instance, random_matrix


class ScriptedRng:
    """Yields preset uniform values, for driving index draws by hand."""

    def __init__(self, values):
        self._values = iter(values)

    def random(self):
        return next(self._values)


def test_small_routes_unchanged():
    r = Route(1, (1, 2, 3))
    assert generate(r, random.Random(0)) is r
    assert generate([7, 8, 9], random.Random(0)) == [7, 8, 9]


def test_scripted_reversal():
    # n = 5: floor(0.2*5) = 1, floor(0.8*5) = 4
    out = generate(["A", "B", "C", "D", "E"], ScriptedRng([0.2, 0.8]))
    assert out == ["A", "D", "C", "B", "E"]


def test_adjacent_draws_are_resampled():
    # i = 1, j = 2 (adjacent), then j = 4
    out = generate(["A", "B", "C", "D", "E"], ScriptedRng([0.2, 0.4, 0.8]))
    assert out == ["A", "D", "C", "B", "E"]


def test_every_i_has_a_far_j_for_n4():
    n = 4
    for i in range(n):
        assert any(abs(i - j) >= 2 for j in range(n))


def test_n4_neighbourhood_enumerated():
    base = [1, 2, 3, 4]
    seen = set()
    for i, j in itertools.product(range(4), repeat=2):
        if abs(i - j) < 2:
            continue
        a, b = sorted((i, j))
        seen.add(tuple(base[:a] + base[a:b][::-1] + base[b:]))
    outs = {tuple(generate(base, random.Random(s))) for s in range(200)}
    assert outs == seen


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(), min_size=0, max_size=40), st.integers(0, 2**32))
def test_generate_is_a_permutation(route, seed):
    out = generate(route, random.Random(seed))
    assert sorted(out) == sorted(route)
    if len(route) <= 3:
        assert out == route


def test_iteration_count_inverse_linear():
    assert n_iterations(SaParams(1.0, 0.001)) == 999
    temps = list(temperatures(SaParams(1.0, 0.001)))
    assert temps[0] == 1.0 and temps[1] == 0.5 and temps[-1] == 1 / 999
    assert all(a > b for a, b in zip(temps, temps[1:]))


@pytest.mark.parametrize("t0, t_end", [(1.0, 0.01), (2.0, 0.001), (1.0, 0.003), (5.0, 0.25)])
def test_iteration_count_formula(t0, t_end):
    assert n_iterations(SaParams(t0, t_end)) == math.ceil(t0 / t_end) - 1


def test_invalid_temperatures():
    with pytest.raises(ValueError):
        SaParams(1.0, 1.0)
    with pytest.raises(ValueError):
        SaParams(1.0, 0.0)


def test_equal_energy_always_accepted():
    rng = random.Random(0)
    assert all(accept(0.0, 0.001, rng) for _ in range(1000))
    assert all(accept(-5.0, 0.001, rng) for _ in range(100))


def _line_instance(n, seed=0, slack=10_000.0):
    rng = random.Random(seed)
    dist = random_matrix(rng, n + 1)
    reqs = [(1, s, 1000.0, 5.0, dist[0][s] + slack) for s in range(1, n + 1)]
    return make_instance(dist, requests=reqs)


def test_loop_runs_999_candidates():
    inst = _line_instance(6)
    trace: list[TraceRow] = []
    anneal(Route(1, (1, 2, 3, 4, 5, 6)), aggregate_day(inst, 1), inst.matrices, SaParams(), random.Random(0), trace)
    assert len(trace) == 999
    assert [t.iteration for t in trace] == list(range(1, 1000))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_best_seen_never_worse(seed):
    rng = random.Random(seed)
    n = rng.randint(4, 12)
    inst = _line_instance(n, seed)
    stops = list(range(1, n + 1))
    rng.shuffle(stops)
    r = Route(1, tuple(stops))
    out = anneal(r, aggregate_day(inst, 1), inst.matrices, SaParams(t0=10.0, t_end=0.01), random.Random(seed))
    assert sorted(out.stops) == sorted(stops)
    assert route_distance(out, inst.matrices) <= route_distance(r, inst.matrices)


def test_windows_enforced():
    # random deadlines; the input order is feasible by construction
    for seed in range(30):
        rng = random.Random(seed)
        n = 8
        dist = random_matrix(rng, n + 1)
        stops = list(range(1, n + 1))
        rng.shuffle(stops)
        t, prev, reqs = 0.0, 0, []
        for s in stops:
            t += dist[prev][s]
            reqs.append((1, s, 1000.0, 5.0, t + rng.uniform(0, 40)))
            t += 5.0
            prev = s
        inst = make_instance(dist, requests=reqs)
        plan = aggregate_day(inst, 1)
        for policy in ReturnPolicy:
            out = anneal(Route(1, stops), plan, inst.matrices, SaParams(t0=10.0, t_end=0.01, return_policy=policy),
                         random.Random(seed))
            assert check_route(out, plan, inst.matrices, inst.fleet) == []


def test_literal_mode_may_break_windows():
    broke = 0
    for seed in range(30):
        rng = random.Random(seed)
        dist = random_matrix(rng, 9)
        stops = list(range(1, 9))
        t, prev, reqs = 0.0, 0, []
        for s in stops:
            t += dist[prev][s]
            reqs.append((1, s, 1000.0, 5.0, t + 1.0))
            t += 5.0
            prev = s
        inst = make_instance(dist, requests=reqs)
        plan = aggregate_day(inst, 1)
        params = SaParams(t0=1000.0, t_end=1.0, enforce_windows=False, return_policy=ReturnPolicy.FINAL_STATE)
        out = anneal(Route(1, stops), plan, inst.matrices, params, random.Random(seed))
        broke += bool(check_route(out, plan, inst.matrices, inst.fleet))
        best = anneal(Route(1, stops), plan, inst.matrices, SaParams(t0=1000.0, t_end=1.0, enforce_windows=False),
                      random.Random(seed))
        assert check_route(best, plan, inst.matrices, inst.fleet) == []
    assert broke > 0


def test_improve_solution_identity_on_short_routes():
    inst = _line_instance(6)
    plan = aggregate_day(inst, 1)
    routes = [Route(1, (1, 2, 3)), Route(1, (4, 5)), Route(1, (6,))]
    sol = improve_solution(routes, plan, inst.matrices, SaParams(), random.Random(1))
    assert list(sol.routes) == routes
    assert sol.total_km == pytest.approx(sum(route_distance(r, inst.matrices) for r in routes))


def test_trace_csv(tmp_path):
    rows = [TraceRow(1, 1.0, 10.5, True, 1, 0), TraceRow(2, 0.5, 10.5, False, 1, 0)]
    path = tmp_path / "t.csv"
    with open(path, "w", newline="") as fh:
        write_trace(rows, fh)
    assert path.read_text().splitlines() == ["day,route,iteration,T,E,accepted", "1,0,1,1.0,10.5,1", "1,0,2,0.5,10.5,0"]
