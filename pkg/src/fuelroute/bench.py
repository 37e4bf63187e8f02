"""Repeated-run benchmark harness and CSV emitters.

Each repetition ``k`` uses the seed ``derive_seed(seed, "rep", k)`` at
every R level, so the construction trials of a small-R run are a prefix of
those of a larger-R run (common random numbers across levels).
"""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass, field
from typing import IO, Sequence

from .anneal import SaParams
from .construct import McParams
from .exact import solve_exact
from .instance import Instance, aggregate_day
from .rng import derive_seed
from .solver import SolverParams, solve_day_detailed

RAW_COLUMNS = ["r_level", "repetition", "mc_ms", "sa_ms", "mc_km", "sa_km"]
TRAJECTORY_COLUMNS = ["elapsed_ms", "best_km"]


class BenchError(RuntimeError):
    def __init__(self, message: str, r_level: int, repetition: int):
        super().__init__(message)
        self.r_level = r_level
        self.repetition = repetition


@dataclass(frozen=True)
class RunRow:
    r_level: int
    repetition: int
    mc_ns: int
    sa_ns: int
    mc_km: float
    sa_km: float

    @property
    def mc_ms(self) -> float:
        return self.mc_ns / 1e6

    @property
    def sa_ms(self) -> float:
        return self.sa_ns / 1e6


@dataclass
class RunStats:
    r_level: int
    rows: list[RunRow] = field(default_factory=list)

    @property
    def repetitions(self) -> int:
        return len(self.rows)

    def _mean(self, attr: str) -> float:
        return statistics.fmean(getattr(r, attr) for r in self.rows)

    @property
    def mean_mc_ms(self) -> float:
        return self._mean("mc_ms")

    @property
    def mean_sa_ms(self) -> float:
        return self._mean("sa_ms")

    @property
    def mean_mc_km(self) -> float:
        return self._mean("mc_km")

    @property
    def mean_sa_km(self) -> float:
        return self._mean("sa_km")


@dataclass
class Trajectory:
    points: list[tuple[float, float]] = field(default_factory=list)

    def add(self, elapsed_ms: float, km: float) -> None:
        if self.points and km >= self.points[-1][1]:
            return
        self.points.append((elapsed_ms, km))


def _days(inst: Instance, day: int | None) -> list[int]:
    return list(range(1, inst.horizon_days + 1)) if day is None else [day]


def run_once(inst: Instance, day: int | None, trials: int, seed: int, sa: SaParams) -> tuple[int, int, float, float]:
    """One pipeline run; ``day=None`` routes every day and sums the totals."""
    mc_ns = sa_ns = 0
    mc_km = sa_km = 0.0
    params = SolverParams(McParams(trials, seed), sa)
    for d in _days(inst, day):
        res = solve_day_detailed(inst, d, params)
        mc_ns += res.mc_ns
        sa_ns += res.sa_ns
        mc_km += res.mc_km
        sa_km += res.sa_km
    return mc_ns, sa_ns, mc_km, sa_km


def run_bench(
    inst: Instance,
    day: int | None,
    r_levels: Sequence[int],
    repetitions: int,
    seed: int = 0,
    sa: SaParams = SaParams(),
) -> list[RunStats]:
    """Run the pipeline ``repetitions`` times per R level, sequentially."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    out = []
    for r in r_levels:
        stats = RunStats(r)
        for k in range(repetitions):
            try:
                mc_ns, sa_ns, mc_km, sa_km = run_once(inst, day, r, derive_seed(seed, "rep", k), sa)
            except Exception as exc:
                raise BenchError(f"R={r} repetition {k}: {exc}", r, k) from exc
            stats.rows.append(RunRow(r, k, mc_ns, sa_ns, mc_km, sa_km))
        out.append(stats)
    return out


def trajectory(inst: Instance, day: int, params: SolverParams = SolverParams()) -> Trajectory:
    """Best distance over time for one run: each construction improvement, then the annealed total."""
    traj = Trajectory()
    start = time.perf_counter_ns()

    def hit(_trial: int, km: float) -> None:
        traj.add((time.perf_counter_ns() - start) / 1e6, km)

    res = solve_day_detailed(inst, day, params, on_improve=hit)
    traj.add((time.perf_counter_ns() - start) / 1e6, res.sa_km)
    return traj


def exact_trajectory(inst: Instance, day: int, **limits) -> Trajectory:
    """Incumbent distance over time of the exact search (small plans only)."""
    traj = Trajectory()
    plan = aggregate_day(inst, day)
    solve_exact(plan, inst.matrices, inst.fleet, on_incumbent=lambda ns, km: traj.add(ns / 1e6, km), **limits)
    return traj


def _fmt(v: float) -> str:
    return repr(float(v))


def emit_csv(data: Sequence[RunStats] | Trajectory, sink: IO[str] | None = None) -> str:
    """Write raw benchmark rows or trajectory points as RFC 4180 CSV.

    Columns are ``r_level, repetition, mc_ms, sa_ms, mc_km, sa_km`` for
    benchmark rows and ``elapsed_ms, best_km`` for a trajectory. Returns the
    text; also writes it to ``sink`` when given.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    if isinstance(data, Trajectory):
        w.writerow(TRAJECTORY_COLUMNS)
        for t, km in data.points:
            w.writerow([_fmt(t), _fmt(km)])
    else:
        w.writerow(RAW_COLUMNS)
        for stats in data:
            for r in stats.rows:
                w.writerow([r.r_level, r.repetition, _fmt(r.mc_ms), _fmt(r.sa_ms), _fmt(r.mc_km), _fmt(r.sa_km)])
    text = buf.getvalue()
    if sink is not None:
        sink.write(text)
    return text


def emit_table_csv(data: Sequence[RunStats], sink: IO[str] | None = None) -> str:
    """Summary table: one row per metric, one column per R level."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["metric", "unit"] + [f"R={s.r_level}" for s in data])
    w.writerow(["mean_mc_km", "km"] + [f"{s.mean_mc_km:.3f}" for s in data])
    w.writerow(["mean_mc_s", "s"] + [f"{s.mean_mc_ms / 1e3:.4f}" for s in data])
    w.writerow(["mean_sa_km", "km"] + [f"{s.mean_sa_km:.3f}" for s in data])
    w.writerow(["mean_sa_s", "s"] + [f"{s.mean_sa_ms / 1e3:.4f}" for s in data])
    text = buf.getvalue()
    if sink is not None:
        sink.write(text)
    return text


def parse_raw_csv(text: str) -> list[RunStats]:
    """Inverse of ``emit_csv`` for benchmark rows (timings come back rounded to ns)."""
    levels: dict[int, RunStats] = {}
    for rec in csv.DictReader(io.StringIO(text)):
        r = int(rec["r_level"])
        levels.setdefault(r, RunStats(r)).rows.append(
            RunRow(
                r,
                int(rec["repetition"]),
                round(float(rec["mc_ms"]) * 1e6),
                round(float(rec["sa_ms"]) * 1e6),
                float(rec["mc_km"]),
                float(rec["sa_km"]),
            )
        )
    return list(levels.values())


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line ``y = a + b x``; returns (a, b, R^2)."""
    fit = statistics.linear_regression(xs, ys)
    mean_y = statistics.fmean(ys)
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - fit.intercept - fit.slope * x) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return fit.intercept, fit.slope, r2
