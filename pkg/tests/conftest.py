import random

import numpy as np
import pytest

from fuelroute.instance import (
    Fleet,
    Instance,
    LoadPolicy,
    Matrices,
    ServiceRequest,
    Station,
    generate_instance,
)

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_instance(dist, travel=None, requests=(), horizon=1, capacity=39_000.0, policy=LoadPolicy.BOUNDED):
    """Instance from explicit matrices; ``requests`` are (day, station, q, s, u) tuples."""
    travel = dist if travel is None else travel
    g = len(dist) - 1
    return Instance(
        stations=tuple(Station(i, f"S{i}") for i in range(1, g + 1)),
        matrices=Matrices.from_lists(dist, travel),
        horizon_days=horizon,
        requests=tuple(ServiceRequest(*r) for r in requests),
        fleet=Fleet(capacity, policy),
    )


def random_matrix(rng: random.Random, n: int, symmetric=True, integer=False, hi=50.0):
    m = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if symmetric and j < i:
                m[i][j] = m[j][i]
                continue
            v = rng.randint(1, int(hi)) if integer else rng.uniform(1.0, hi)
            m[i][j] = float(v)
    return m


def small_instance(seed: int, g: int, *, integer=False, symmetric=True, capacity=39_000.0, tight=False):
    """One-day instance on a random matrix with one request per station."""
    rng = random.Random(seed)
    dist = random_matrix(rng, g + 1, symmetric, integer)
    reqs = []
    for s in range(1, g + 1):
        q = float(rng.randint(2, 20) * 1000)
        svc = float(rng.randint(10, 60))
        slack = rng.randint(5, 60) if tight else rng.randint(60, 400)
        reqs.append((1, s, q, svc, dist[0][s] + slack))
    return make_instance(dist, requests=reqs, capacity=capacity)


@pytest.fixture
def profile_instance():
    return generate_instance(seed=7)


@pytest.fixture
def two_stop():
    # travel(0,1)=30, s1=54, travel(1,2)=20
    dist = [[0, 30, 40], [30, 0, 20], [40, 20, 0]]
    return make_instance(dist, requests=[(1, 1, 20_000, 54, 300), (1, 2, 18_000, 30, 300)])


@pytest.fixture
def np_rng():
    return np.random.default_rng(0)
