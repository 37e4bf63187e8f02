"""Problem instances: data model, validation, JSON I/O and synthetic generation.

Index 0 of both matrices is the fuel hub (depot); stations are numbered
1..G. Distances are in km, travel and service times in minutes, demands in
liters. Deadlines are latest arrival times measured from the route start
(the vehicle leaves the hub at t = 0).
"""

from __future__ import annotations

import enum
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

DEFAULT_CAPACITY = 39_000.0


class InstanceError(ValueError):
    """Raised when a document or instance fails validation."""

    def __init__(self, message: str, findings: Sequence["Finding"] = ()):
        super().__init__(message)
        self.findings = list(findings)


class InfeasibleInstance(Exception):
    """A day plan that no route set can serve."""

    def __init__(self, message: str, day: int | None = None, station: int | None = None):
        super().__init__(message)
        self.day = day
        self.station = station


class LoadPolicy(str, enum.Enum):
    BOUNDED = "bounded"
    FULL_LOAD = "full_load"


@dataclass(frozen=True)
class Station:
    id: int
    label: str = ""
    x_km: float | None = None
    y_km: float | None = None


@dataclass(frozen=True)
class Matrices:
    dist: tuple[tuple[float, ...], ...]
    travel: tuple[tuple[float, ...], ...]

    @classmethod
    def from_lists(cls, dist, travel) -> "Matrices":
        return cls(
            tuple(tuple(float(v) for v in row) for row in dist),
            tuple(tuple(float(v) for v in row) for row in travel),
        )

    @property
    def size(self) -> int:
        return len(self.dist)


@dataclass(frozen=True)
class ServiceRequest:
    day: int
    station: int
    demand_liters: float
    service_minutes: float
    deadline_minutes: float


@dataclass(frozen=True)
class Fleet:
    capacity_liters: float = DEFAULT_CAPACITY
    load_policy: LoadPolicy = LoadPolicy.BOUNDED


@dataclass(frozen=True)
class Instance:
    stations: tuple[Station, ...]
    matrices: Matrices
    horizon_days: int
    requests: tuple[ServiceRequest, ...]
    fleet: Fleet = field(default_factory=Fleet)

    @property
    def n_stations(self) -> int:
        return len(self.stations)


@dataclass(frozen=True, eq=True)
class DayPlan:
    """Per-station aggregates of one day's requests.

    ``demand`` and ``service`` are sums over the day's requests at a
    station, ``deadline`` is their minimum. Only stations with requests
    appear; ``stations`` is sorted ascending.
    """

    day: int
    stations: tuple[int, ...]
    demand: Mapping[int, float]
    service: Mapping[int, float]
    deadline: Mapping[int, float]

    def __len__(self) -> int:
        return len(self.stations)

    @property
    def total_demand(self) -> float:
        return math.fsum(self.demand[s] for s in self.stations)

    def subset(self, stations: Iterable[int]) -> "DayPlan":
        keep = tuple(sorted(stations))
        return DayPlan(
            self.day,
            keep,
            {s: self.demand[s] for s in keep},
            {s: self.service[s] for s in keep},
            {s: self.deadline[s] for s in keep},
        )


@dataclass(frozen=True)
class Finding:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


# empty iff the instance is well-formed
ValidationReport = list[Finding]


# --------------------------------------------------------------------------
# validation


def _check_matrix(name: str, mat, n: int, findings: list[Finding]) -> bool:
    if len(mat) != n or any(len(row) != n for row in mat):
        rows = len(mat)
        cols = sorted({len(row) for row in mat})
        findings.append(
            Finding(name, f"dimension mismatch: expected {n}x{n} (G+1), got {rows} rows of widths {cols}")
        )
        return False
    for i, row in enumerate(mat):
        for j, v in enumerate(row):
            if not math.isfinite(v):
                findings.append(Finding(f"{name}[{i}][{j}]", "non-finite entry"))
            elif v < 0:
                findings.append(Finding(f"{name}[{i}][{j}]", f"negative entry {v}"))
        if row[i] != 0:
            findings.append(Finding(f"{name}[{i}][{i}]", f"nonzero diagonal at {i}"))
    return True


def validate(inst: Instance) -> list[Finding]:
    """List every violated invariant of ``inst``; empty iff well-formed."""
    findings: list[Finding] = []
    g = len(inst.stations)
    ids = [s.id for s in inst.stations]
    if sorted(ids) != list(range(1, g + 1)):
        findings.append(Finding("stations", f"station ids must be unique and dense 1..{g}, got {sorted(ids)}"))
    known = set(ids)

    travel_ok = _check_matrix("travel", inst.matrices.travel, g + 1, findings)
    _check_matrix("dist", inst.matrices.dist, g + 1, findings)

    cap = inst.fleet.capacity_liters
    if not cap > 0:
        findings.append(Finding("fleet.capacity_liters", f"capacity must be positive, got {cap}"))
    if inst.horizon_days < 1:
        findings.append(Finding("horizon_days", f"horizon must be >= 1, got {inst.horizon_days}"))

    daily: dict[tuple[int, int], float] = defaultdict(float)
    for k, r in enumerate(inst.requests):
        loc = f"requests[{k}]"
        if not 1 <= r.day <= inst.horizon_days:
            findings.append(Finding(loc, f"day {r.day} outside horizon 1..{inst.horizon_days}"))
        if r.station not in known:
            findings.append(Finding(loc, f"unknown station {r.station}"))
            continue
        for attr in ("demand_liters", "service_minutes", "deadline_minutes"):
            v = getattr(r, attr)
            if not (math.isfinite(v) and v > 0):
                findings.append(Finding(loc, f"{attr} must be positive, got {v}"))
        if r.demand_liters > cap:
            findings.append(Finding(loc, f"demand {r.demand_liters} exceeds capacity {cap}"))
        if travel_ok and 0 < r.station <= g and r.deadline_minutes <= inst.matrices.travel[0][r.station]:
            findings.append(
                Finding(
                    loc,
                    f"unreachable deadline: {r.deadline_minutes} <= travel time "
                    f"{inst.matrices.travel[0][r.station]} from depot to station {r.station}",
                )
            )
        daily[(r.day, r.station)] += r.demand_liters

    for (day, station), total in sorted(daily.items()):
        if total > cap:
            findings.append(
                Finding(f"day {day} station {station}", f"aggregated demand {total} exceeds capacity {cap}")
            )
    return findings


def aggregate_day(inst: Instance, day: int) -> DayPlan:
    """Aggregate the requests of ``day``: sum demand, sum service, min deadline."""
    if not 1 <= day <= inst.horizon_days:
        raise ValueError(f"day {day} outside horizon 1..{inst.horizon_days}")
    demand: dict[int, list[float]] = defaultdict(list)
    service: dict[int, list[float]] = defaultdict(list)
    deadline: dict[int, float] = {}
    for r in inst.requests:
        if r.day != day:
            continue
        demand[r.station].append(r.demand_liters)
        service[r.station].append(r.service_minutes)
        deadline[r.station] = min(deadline.get(r.station, math.inf), r.deadline_minutes)
    stations = tuple(sorted(demand))
    # fsum over sorted values keeps the aggregate independent of request order
    plan = DayPlan(
        day,
        stations,
        {s: math.fsum(sorted(demand[s])) for s in stations},
        {s: math.fsum(sorted(service[s])) for s in stations},
        {s: deadline[s] for s in stations},
    )
    cap = inst.fleet.capacity_liters
    for s in stations:
        if plan.demand[s] > cap:
            raise InfeasibleInstance(
                f"day {day}: aggregated demand {plan.demand[s]} at station {s} exceeds capacity {cap}",
                day=day,
                station=s,
            )
    return plan


# --------------------------------------------------------------------------
# JSON I/O


def fmt_num(x: float) -> str:
    s = format(round(float(x), 6), ".6f").rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _row(values: Iterable[float]) -> str:
    return "[" + ", ".join(fmt_num(v) for v in values) + "]"


def dumps_instance(inst: Instance) -> str:
    """Serialize to the canonical JSON form (requests sorted by day, station)."""
    out = ["{", '  "stations": [']
    st = []
    for s in sorted(inst.stations, key=lambda s: s.id):
        parts = [f'"id": {s.id}', f'"label": {json.dumps(s.label)}']
        if s.x_km is not None:
            parts.append(f'"x_km": {fmt_num(s.x_km)}')
        if s.y_km is not None:
            parts.append(f'"y_km": {fmt_num(s.y_km)}')
        st.append("    {" + ", ".join(parts) + "}")
    out.append(",\n".join(st))
    out.append("  ],")
    for name in ("dist", "travel"):
        mat = getattr(inst.matrices, name)
        out.append(f'  "{name}": [')
        out.append(",\n".join("    " + _row(row) for row in mat))
        out.append("  ],")
    out.append(f'  "horizon_days": {inst.horizon_days},')
    out.append('  "requests": [')
    reqs = sorted(
        inst.requests,
        key=lambda r: (r.day, r.station, r.deadline_minutes, r.demand_liters, r.service_minutes),
    )
    out.append(
        ",\n".join(
            f'    {{"day": {r.day}, "station": {r.station}, "demand_liters": {fmt_num(r.demand_liters)}, '
            f'"service_minutes": {fmt_num(r.service_minutes)}, "deadline_minutes": {fmt_num(r.deadline_minutes)}}}'
            for r in reqs
        )
    )
    out.append("  ],")
    out.append(
        f'  "fleet": {{"capacity_liters": {fmt_num(inst.fleet.capacity_liters)}, '
        f'"load_policy": "{inst.fleet.load_policy.value}"}}'
    )
    out.append("}")
    return "\n".join(out) + "\n"


def save_instance(inst: Instance, sink: IO[str] | str) -> None:
    text = dumps_instance(inst)
    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sink.write(text)


def _require(doc: Mapping, key: str, kind, where: str):
    if key not in doc:
        raise InstanceError(f"malformed document: missing field {where}{key!r}")
    value = doc[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise InstanceError(f"malformed document: field {where}{key!r} has wrong type {type(value).__name__}")
    return value


def _matrix(doc: Mapping, key: str) -> list[list[float]]:
    rows = _require(doc, key, list, "")
    try:
        return [[float(v) for v in row] for row in rows]
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"malformed document: {key} must be an array of numeric arrays") from exc


def instance_from_dict(doc: Mapping) -> Instance:
    """Build an Instance from a parsed JSON document without validating it."""
    if not isinstance(doc, Mapping):
        raise InstanceError("malformed document: top level must be an object")
    number = (int, float)
    stations = []
    for k, s in enumerate(_require(doc, "stations", list, "")):
        if not isinstance(s, Mapping):
            raise InstanceError(f"malformed document: stations[{k}] must be an object")
        x = s.get("x_km")
        y = s.get("y_km")
        stations.append(
            Station(
                id=_require(s, "id", int, f"stations[{k}]."),
                label=str(s.get("label", "")),
                x_km=None if x is None else float(x),
                y_km=None if y is None else float(y),
            )
        )
    requests = []
    for k, r in enumerate(_require(doc, "requests", list, "")):
        if not isinstance(r, Mapping):
            raise InstanceError(f"malformed document: requests[{k}] must be an object")
        where = f"requests[{k}]."
        requests.append(
            ServiceRequest(
                day=_require(r, "day", int, where),
                station=_require(r, "station", int, where),
                demand_liters=float(_require(r, "demand_liters", number, where)),
                service_minutes=float(_require(r, "service_minutes", number, where)),
                deadline_minutes=float(_require(r, "deadline_minutes", number, where)),
            )
        )
    fleet_doc = doc.get("fleet", {})
    if not isinstance(fleet_doc, Mapping):
        raise InstanceError("malformed document: fleet must be an object")
    try:
        policy = LoadPolicy(fleet_doc.get("load_policy", LoadPolicy.BOUNDED.value))
    except ValueError as exc:
        raise InstanceError(f"malformed document: unknown load_policy {fleet_doc.get('load_policy')!r}") from exc
    capacity = fleet_doc.get("capacity_liters", DEFAULT_CAPACITY)
    if not isinstance(capacity, number) or isinstance(capacity, bool):
        raise InstanceError("malformed document: fleet.capacity_liters must be numeric")
    return Instance(
        stations=tuple(stations),
        matrices=Matrices.from_lists(_matrix(doc, "dist"), _matrix(doc, "travel")),
        horizon_days=_require(doc, "horizon_days", int, ""),
        requests=tuple(requests),
        fleet=Fleet(float(capacity), policy),
    )


def load_instance(source: bytes | str | IO) -> Instance:
    """Parse and validate an instance document.

    ``source`` may be raw bytes, a text string or a readable stream. Raises
    InstanceError listing every finding when the document is not valid.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InstanceError("malformed document: not UTF-8") from exc
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed document: {exc}") from exc
    inst = instance_from_dict(doc)
    findings = validate(inst)
    if findings:
        raise InstanceError(
            f"invalid instance ({len(findings)} finding(s)): " + "; ".join(map(str, findings[:5])),
            findings,
        )
    return inst


def read_instance(path: str) -> Instance:
    with open(path, "rb") as fh:
        return load_instance(fh.read())


# --------------------------------------------------------------------------
# generator


def draw_demands(
    rng: np.random.Generator,
    n: int,
    shape: float,
    scale: float,
    bounds: tuple[float, float],
    bound_policy: str = "clip",
    max_attempts: int = 1000,
) -> np.ndarray:
    """Draw ``n`` gamma-distributed demands restricted to ``bounds``.

    ``bound_policy="clip"`` clamps out-of-range draws to the nearest bound;
    ``"resample"`` redraws them, failing after ``max_attempts`` tries per value.
    """
    lo, hi = bounds
    values = rng.gamma(shape, scale, size=n)
    if bound_policy == "clip":
        return np.clip(values, lo, hi)
    if bound_policy != "resample":
        raise ValueError(f"unknown bound policy {bound_policy!r}")
    for k in range(n):
        attempts = 1
        while not lo <= values[k] <= hi:
            if attempts >= max_attempts:
                raise InstanceError(
                    f"demand bounds [{lo}, {hi}] incompatible with gamma(shape={shape}, scale={scale}): "
                    f"{max_attempts} draws out of range"
                )
            values[k] = rng.gamma(shape, scale)
            attempts += 1
    return values


def generate_instance(
    g: int = 65,
    h: int = 3,
    n_requests: int = 166,
    gamma_shape: float = 2.0,
    gamma_scale: float = 2684.5,
    demand_bounds: tuple[float, float] = (200.0, 15_500.0),
    mean_service: float = 54.0,
    geometry: tuple[float, float] = (100.0, 100.0),
    seed: int = 0,
    *,
    speed_kmh: float = 60.0,
    capacity: float = DEFAULT_CAPACITY,
    deadline_slack: tuple[float, float] = (30.0, 900.0),
    bound_policy: str = "clip",
) -> Instance:
    """Synthesize a random instance shaped like a fuel-delivery network.

    Stations are uniform in a ``geometry`` (width, height) km box with the
    hub at its centre; distances are Euclidean and travel time is distance
    over ``speed_kmh``. Every station receives at least one request when
    ``n_requests >= g``. Service times are uniform on
    [0.5, 1.5] * ``mean_service``. Each deadline is the depot travel time
    plus a uniform slack from ``deadline_slack``, so every request is
    reachable. All values are rounded to 6 decimals so the in-memory
    instance equals its serialized form.
    """
    if min(g, h, n_requests) < 1:
        raise ValueError("g, h and n_requests must be positive")
    if min(gamma_shape, gamma_scale, mean_service, speed_kmh, capacity) <= 0 or min(geometry) <= 0:
        raise ValueError("all generator parameters must be positive")
    lo, hi = demand_bounds
    if not 0 < lo <= hi <= capacity:
        raise ValueError(f"demand bounds must lie within (0, {capacity}], got {demand_bounds}")
    if not 0 < deadline_slack[0] <= deadline_slack[1]:
        raise ValueError("deadline slack must be a positive interval")

    rng = np.random.default_rng(seed)
    width, height = geometry
    xy = np.column_stack([rng.uniform(0, width, g), rng.uniform(0, height, g)])
    pts = np.vstack([[width / 2, height / 2], xy])
    dist = np.round(np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1)), 6)
    travel = np.round(dist / speed_kmh * 60.0, 6)

    demands = np.round(draw_demands(rng, n_requests, gamma_shape, gamma_scale, demand_bounds, bound_policy), 6)
    services = np.round(rng.uniform(0.5 * mean_service, 1.5 * mean_service, n_requests), 6)
    slack = rng.uniform(deadline_slack[0], deadline_slack[1], n_requests)

    daily: dict[tuple[int, int], float] = defaultdict(float)
    requests = []
    for k in range(n_requests):
        for _ in range(1000):
            station = k + 1 if k < g else int(rng.integers(1, g + 1))
            day = int(rng.integers(1, h + 1))
            if daily[(day, station)] + demands[k] <= capacity:
                break
        else:
            raise InstanceError("could not place requests without exceeding capacity per station-day")
        daily[(day, station)] += demands[k]
        requests.append(
            ServiceRequest(
                day=day,
                station=station,
                demand_liters=float(demands[k]),
                service_minutes=float(services[k]),
                deadline_minutes=round(float(travel[0, station] + slack[k]), 6),
            )
        )

    stations = tuple(
        Station(i, f"S{i:03d}", round(float(xy[i - 1, 0]), 6), round(float(xy[i - 1, 1]), 6))
        for i in range(1, g + 1)
    )
    requests.sort(key=lambda r: (r.day, r.station, r.deadline_minutes, r.demand_liters, r.service_minutes))
    return Instance(
        stations=stations,
        matrices=Matrices.from_lists(dist.tolist(), travel.tolist()),
        horizon_days=h,
        requests=tuple(requests),
        fleet=Fleet(float(capacity), LoadPolicy.BOUNDED),
    )
