"""Domain types, JSON instance schema, loading and validation.

An :class:`Instance` bundles everything that defines one planning day:
the timetable (trips), the EMU fleet, depots with dispatch/return bounds,
driver availability windows, turnaround limits and capacity tolerances.
Instances are immutable after construction and safe to share across
threads.

Exact arithmetic: monetary-ish quantities (``alpha``, ``cost_per_km``,
``distance``) are kept as :class:`fractions.Fraction` so that objective
values and QUBO coefficients downstream stay exact. The JSON loader
parses number literals directly into fractions, so ``0.01`` in a file
means exactly 1/100.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, IO, Mapping, Optional, Union

__all__ = [
    "InstanceError",
    "Trip",
    "EmuType",
    "Depot",
    "DriverWindow",
    "Instance",
    "load_instance",
    "loads_instance",
    "serialize_instance",
]


class InstanceError(ValueError):
    """Raised on schema violations, dangling references or broken invariants.

    ``path`` is a JSON-pointer-style location of the offending field,
    e.g. ``/trips/2/arrive``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


Rational = Union[int, Fraction]


def _frac(value: Any, path: str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InstanceError(path, "expected a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # str() of a float is the shortest round-tripping decimal, so this
        # converts "what was written in the file" exactly.
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise InstanceError(path, f"not a rational number: {value!r}")
    raise InstanceError(path, f"expected a number, got {type(value).__name__}")


def _require(obj: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in obj:
        raise InstanceError(f"{path}/{key}", "required field missing")
    return obj[key]


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
        raise InstanceError(path, f"expected an integer, got {value!r}")
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise InstanceError(path, f"expected an integer, got {value}")
        return int(value)
    return value


def _bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise InstanceError(path, f"expected a boolean, got {value!r}")
    return value


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str) or not value:
        raise InstanceError(path, f"expected a non-empty string, got {value!r}")
    return value


@dataclass(frozen=True)
class Trip:
    """One timetabled journey from its origin to its destination station.

    ``couplable`` marks membership in the subset of trips that may be
    served by a coupled pair of identical EMUs. Non-obligatory trips are
    optional service runs: they may be covered but no coverage constraint
    is emitted for them. The four ``*_tolerance_*`` fields override the
    instance-wide shortage tolerances for arcs pointing at this trip.
    """

    id: str
    origin: str
    destination: str
    depart: int  # minutes since midnight
    arrive: int
    passengers: int
    bicycles: int = 0
    couplable: bool = False
    allowed_types: frozenset[str] = frozenset()
    distance: Fraction = Fraction(1)
    obligatory: bool = True
    driver_depot: Optional[str] = None
    seat_tolerance_single: Optional[int] = None
    seat_tolerance_coupled: Optional[int] = None
    bike_tolerance_single: Optional[int] = None
    bike_tolerance_coupled: Optional[int] = None

    def duration(self) -> int:
        return self.arrive - self.depart


@dataclass(frozen=True)
class EmuType:
    """A class of electric multiple units, the atomic rolling-stock resource."""

    id: str
    seats: int
    bike_slots: int = 0
    cost_per_km: Fraction = Fraction(1)
    couplable: bool = False


@dataclass(frozen=True)
class Depot:
    """Per-type dispatch and return bounds at one station.

    ``in_min``/``in_max`` are optional: a depot without return bounds has
    no sink node, meaning EMUs need not come back by end of day (they rest
    wherever their last trip ends).
    """

    id: str
    station: str
    out_min: Mapping[str, int] = field(default_factory=dict)
    out_max: Mapping[str, int] = field(default_factory=dict)
    in_min: Optional[Mapping[str, int]] = None
    in_max: Optional[Mapping[str, int]] = None

    @property
    def has_sink(self) -> bool:
        return self.in_max is not None

    def out_bounds(self, type_id: str) -> tuple[int, int]:
        return self.out_min.get(type_id, 0), self.out_max.get(type_id, 0)

    def in_bounds(self, type_id: str) -> tuple[int, int]:
        if self.in_max is None:
            return 0, 0
        lo = (self.in_min or {}).get(type_id, 0)
        return lo, self.in_max.get(type_id, 0)


@dataclass(frozen=True)
class DriverWindow:
    """Driver availability at one checkpoint time for one home depot."""

    depot: str
    at: int  # checkpoint, minutes since midnight
    min_drivers: int = 0
    max_drivers: int = 0
    license: Optional[str] = None


@dataclass(frozen=True)
class Instance:
    """The full, validated problem input for one planning day."""

    trips: tuple[Trip, ...]
    emu_types: tuple[EmuType, ...]
    depots: tuple[Depot, ...]
    driver_windows: tuple[DriverWindow, ...] = ()
    delta_min: int = 0
    delta_max: int = 0
    seat_tolerance_single: int = 0
    seat_tolerance_coupled: int = 0
    bike_tolerance_single: int = 0
    bike_tolerance_coupled: int = 0
    alpha: Fraction = Fraction(0)
    licenses: Mapping[str, frozenset[str]] = field(default_factory=dict)
    meta: Mapping[str, Any] = field(default_factory=dict)

    def type_by_id(self, type_id: str) -> EmuType:
        return self._type_index[type_id]

    def trip_by_id(self, trip_id: str) -> Trip:
        return self._trip_index[trip_id]

    def depot_by_id(self, depot_id: str) -> Depot:
        return self._depot_index[depot_id]

    @property
    def obligatory_trips(self) -> tuple[Trip, ...]:
        return tuple(t for t in self.trips if t.obligatory)

    def seat_tolerance(self, k: int, trip: Optional[Trip] = None) -> int:
        if trip is not None:
            override = (trip.seat_tolerance_coupled if k == 2
                        else trip.seat_tolerance_single)
            if override is not None:
                return override
        return self.seat_tolerance_coupled if k == 2 else self.seat_tolerance_single

    def bike_tolerance(self, k: int, trip: Optional[Trip] = None) -> int:
        if trip is not None:
            override = (trip.bike_tolerance_coupled if k == 2
                        else trip.bike_tolerance_single)
            if override is not None:
                return override
        return self.bike_tolerance_coupled if k == 2 else self.bike_tolerance_single

    def driver_depot_of(self, trip: Trip) -> Optional[str]:
        """Depot whose driver pool serves this trip.

        The depot-driver-trip assignment is predefined: explicit per trip,
        defaulting to the only depot when the instance has exactly one.
        Trips without an assignment impose no driver load.
        """
        if trip.driver_depot is not None:
            return trip.driver_depot
        if len(self.depots) == 1:
            return self.depots[0].id
        return None

    def license_types(self, license_id: str) -> frozenset[str]:
        """EMU types a license covers; unmapped ids cover the type of the same name."""
        if license_id in self.licenses:
            return self.licenses[license_id]
        return frozenset({license_id})

    def __post_init__(self):
        object.__setattr__(self, "_trip_index", {t.id: t for t in self.trips})
        object.__setattr__(self, "_type_index", {r.id: r for r in self.emu_types})
        object.__setattr__(self, "_depot_index", {d.id: d for d in self.depots})
        _validate(self)


def _validate(inst: Instance) -> None:
    type_ids = set()
    for i, r in enumerate(inst.emu_types):
        path = f"/emu_types/{i}"
        if r.id in type_ids:
            raise InstanceError(f"{path}/id", f"duplicate EMU type id {r.id!r}")
        type_ids.add(r.id)
        if r.seats <= 0:
            raise InstanceError(f"{path}/seats", "must be > 0")
        if r.bike_slots < 0:
            raise InstanceError(f"{path}/bike_slots", "must be >= 0")
        if r.cost_per_km < 0:
            raise InstanceError(f"{path}/cost_per_km", "must be >= 0")

    trip_ids = set()
    for i, t in enumerate(inst.trips):
        path = f"/trips/{i}"
        if t.id in trip_ids:
            raise InstanceError(f"{path}/id", f"duplicate trip id {t.id!r}")
        trip_ids.add(t.id)
        if t.arrive <= t.depart:
            raise InstanceError(f"{path}/arrive", "arrive must be > depart")
        if t.passengers < 0:
            raise InstanceError(f"{path}/passengers", "must be >= 0")
        if t.bicycles < 0:
            raise InstanceError(f"{path}/bicycles", "must be >= 0")
        if t.distance < 0:
            raise InstanceError(f"{path}/distance", "must be >= 0")
        if t.obligatory and not t.allowed_types:
            raise InstanceError(f"{path}/allowed_types",
                                "obligatory trip admits no EMU type")
        for name in ("seat_tolerance_single", "seat_tolerance_coupled",
                     "bike_tolerance_single", "bike_tolerance_coupled"):
            override = getattr(t, name)
            if override is not None and override < 0:
                raise InstanceError(f"{path}/{name}", "must be >= 0")
        for rid in sorted(t.allowed_types):
            if rid not in type_ids:
                raise InstanceError(f"{path}/allowed_types",
                                    f"unknown EMU type {rid!r}")

    depot_ids = set()
    for i, d in enumerate(inst.depots):
        path = f"/depots/{i}"
        if d.id in depot_ids:
            raise InstanceError(f"{path}/id", f"duplicate depot id {d.id!r}")
        depot_ids.add(d.id)
        for name, bounds in (("out_min", d.out_min), ("out_max", d.out_max)):
            for rid in bounds:
                if rid not in type_ids:
                    raise InstanceError(f"{path}/{name}", f"unknown EMU type {rid!r}")
        for rid in type_ids:
            lo, hi = d.out_bounds(rid)
            if not 0 <= lo <= hi:
                raise InstanceError(f"{path}/out_min",
                                    f"need 0 <= out_min <= out_max for type {rid!r}")
        if (d.in_min is None) != (d.in_max is None):
            raise InstanceError(f"{path}/in_min",
                                "in_min and in_max must be given together")
        if d.in_max is not None:
            for rid in list(d.in_max) + list(d.in_min or {}):
                if rid not in type_ids:
                    raise InstanceError(f"{path}/in_max", f"unknown EMU type {rid!r}")
            for rid in type_ids:
                lo, hi = d.in_bounds(rid)
                if not 0 <= lo <= hi:
                    raise InstanceError(f"{path}/in_min",
                                        f"need 0 <= in_min <= in_max for type {rid!r}")

    for i, t in enumerate(inst.trips):
        if t.driver_depot is not None and t.driver_depot not in depot_ids:
            raise InstanceError(f"/trips/{i}/driver_depot",
                                f"unknown depot {t.driver_depot!r}")

    seen_windows = set()
    for i, w in enumerate(inst.driver_windows):
        path = f"/driver_windows/{i}"
        if w.depot not in depot_ids:
            raise InstanceError(f"{path}/depot", f"unknown depot {w.depot!r}")
        if not 0 <= w.min_drivers <= w.max_drivers:
            raise InstanceError(f"{path}/min_drivers",
                                "need 0 <= min_drivers <= max_drivers")
        key = (w.depot, w.at, w.license)
        if key in seen_windows:
            raise InstanceError(f"{path}/at", f"duplicate window {key}")
        seen_windows.add(key)

    for lic, types in inst.licenses.items():
        for rid in sorted(types):
            if rid not in type_ids:
                raise InstanceError(f"/licenses/{lic}", f"unknown EMU type {rid!r}")

    if inst.delta_min > inst.delta_max:
        raise InstanceError("/delta_min", "delta_min must be <= delta_max")
    for name in ("seat_tolerance_single", "seat_tolerance_coupled",
                 "bike_tolerance_single", "bike_tolerance_coupled"):
        if getattr(inst, name) < 0:
            raise InstanceError(f"/tolerances/{name}", "must be >= 0")
    if inst.alpha < 0:
        raise InstanceError("/alpha", "must be >= 0")


# ---------------------------------------------------------------------------
# JSON schema <-> Instance


def _type_bounds(obj: Any, path: str) -> dict[str, int]:
    if not isinstance(obj, Mapping):
        raise InstanceError(path, "expected an object mapping type id -> integer")
    return {str(k): _int(v, f"{path}/{k}") for k, v in obj.items()}


def _parse_trip(obj: Mapping[str, Any], path: str) -> Trip:
    allowed = _require(obj, "allowed_types", path)
    if not isinstance(allowed, list):
        raise InstanceError(f"{path}/allowed_types", "expected a list of type ids")
    return Trip(
        id=_str(_require(obj, "id", path), f"{path}/id"),
        origin=_str(_require(obj, "origin", path), f"{path}/origin"),
        destination=_str(_require(obj, "destination", path), f"{path}/destination"),
        depart=_int(_require(obj, "depart", path), f"{path}/depart"),
        arrive=_int(_require(obj, "arrive", path), f"{path}/arrive"),
        passengers=_int(obj.get("passengers", 0), f"{path}/passengers"),
        bicycles=_int(obj.get("bicycles", 0), f"{path}/bicycles"),
        couplable=_bool(obj.get("couplable", False), f"{path}/couplable"),
        allowed_types=frozenset(_str(x, f"{path}/allowed_types") for x in allowed),
        distance=_frac(obj.get("distance", 1), f"{path}/distance"),
        obligatory=_bool(obj.get("obligatory", True), f"{path}/obligatory"),
        driver_depot=(None if obj.get("driver_depot") is None
                      else _str(obj["driver_depot"], f"{path}/driver_depot")),
        **{name: (None if obj.get(name) is None
                  else _int(obj[name], f"{path}/{name}"))
           for name in ("seat_tolerance_single", "seat_tolerance_coupled",
                        "bike_tolerance_single", "bike_tolerance_coupled")},
    )


def _parse_emu_type(obj: Mapping[str, Any], path: str) -> EmuType:
    return EmuType(
        id=_str(_require(obj, "id", path), f"{path}/id"),
        seats=_int(_require(obj, "seats", path), f"{path}/seats"),
        bike_slots=_int(obj.get("bike_slots", 0), f"{path}/bike_slots"),
        cost_per_km=_frac(obj.get("cost_per_km", 1), f"{path}/cost_per_km"),
        couplable=_bool(obj.get("couplable", False), f"{path}/couplable"),
    )


def _parse_depot(obj: Mapping[str, Any], path: str) -> Depot:
    in_min = obj.get("in_min")
    in_max = obj.get("in_max")
    return Depot(
        id=_str(_require(obj, "id", path), f"{path}/id"),
        station=_str(_require(obj, "station", path), f"{path}/station"),
        out_min=_type_bounds(obj.get("out_min", {}), f"{path}/out_min"),
        out_max=_type_bounds(_require(obj, "out_max", path), f"{path}/out_max"),
        in_min=None if in_min is None else _type_bounds(in_min, f"{path}/in_min"),
        in_max=None if in_max is None else _type_bounds(in_max, f"{path}/in_max"),
    )


def _parse_window(obj: Mapping[str, Any], path: str) -> DriverWindow:
    return DriverWindow(
        depot=_str(_require(obj, "depot", path), f"{path}/depot"),
        at=_int(_require(obj, "at", path), f"{path}/at"),
        min_drivers=_int(obj.get("min_drivers", 0), f"{path}/min_drivers"),
        max_drivers=_int(_require(obj, "max_drivers", path), f"{path}/max_drivers"),
        license=(None if obj.get("license") is None
                 else _str(obj["license"], f"{path}/license")),
    )


def loads_instance(text: str) -> Instance:
    """Parse an instance from JSON text. See :func:`load_instance`."""
    try:
        data = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InstanceError("/", f"invalid JSON: {exc}") from exc
    if not isinstance(data, Mapping):
        raise InstanceError("/", "top level must be a JSON object")

    tol = data.get("tolerances", {})
    if not isinstance(tol, Mapping):
        raise InstanceError("/tolerances", "expected an object")

    def seq(key: str) -> list:
        value = data.get(key, [])
        if not isinstance(value, list):
            raise InstanceError(f"/{key}", "expected a list")
        return value

    licenses_raw = data.get("licenses", {})
    if not isinstance(licenses_raw, Mapping):
        raise InstanceError("/licenses", "expected an object")
    licenses = {str(k): frozenset(_str(x, f"/licenses/{k}") for x in v)
                for k, v in licenses_raw.items()}

    return Instance(
        trips=tuple(_parse_trip(t, f"/trips/{i}") for i, t in enumerate(seq("trips"))),
        emu_types=tuple(_parse_emu_type(r, f"/emu_types/{i}")
                        for i, r in enumerate(seq("emu_types"))),
        depots=tuple(_parse_depot(d, f"/depots/{i}")
                     for i, d in enumerate(seq("depots"))),
        driver_windows=tuple(_parse_window(w, f"/driver_windows/{i}")
                             for i, w in enumerate(seq("driver_windows"))),
        delta_min=_int(_require(data, "delta_min", ""), "/delta_min"),
        delta_max=_int(_require(data, "delta_max", ""), "/delta_max"),
        seat_tolerance_single=_int(tol.get("seat_single", 0), "/tolerances/seat_single"),
        seat_tolerance_coupled=_int(tol.get("seat_coupled", 0), "/tolerances/seat_coupled"),
        bike_tolerance_single=_int(tol.get("bike_single", 0), "/tolerances/bike_single"),
        bike_tolerance_coupled=_int(tol.get("bike_coupled", 0), "/tolerances/bike_coupled"),
        alpha=_frac(data.get("alpha", 0), "/alpha"),
        licenses=licenses,
        meta=dict(data.get("meta", {})),
    )


def load_instance(source: Union[str, IO[bytes], IO[str]]) -> Instance:
    """Load and validate an instance from a path or an open stream.

    Raises :class:`InstanceError` with a JSON-pointer-style path on any
    schema violation, dangling reference or invariant breach.
    """
    if isinstance(source, str):
        with open(source, "rb") as fh:
            raw = fh.read()
    else:
        raw = source.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    return loads_instance(raw)


def _num(value: Rational) -> Union[int, float, str]:
    """Emit a rational as a JSON value that parses back to the same number."""
    f = Fraction(value)
    if f.denominator == 1:
        return int(f)
    as_float = float(f)
    if Fraction(str(as_float)) == f:
        return as_float
    return f"{f.numerator}/{f.denominator}"


def serialize_instance(inst: Instance) -> str:
    """Inverse of :func:`loads_instance`: deterministic, round-trip exact."""
    def trip(t: Trip) -> dict:
        obj: dict[str, Any] = {
            "id": t.id, "origin": t.origin, "destination": t.destination,
            "depart": t.depart, "arrive": t.arrive,
            "passengers": t.passengers, "bicycles": t.bicycles,
            "couplable": t.couplable,
            "allowed_types": sorted(t.allowed_types),
            "distance": _num(t.distance), "obligatory": t.obligatory,
        }
        if t.driver_depot is not None:
            obj["driver_depot"] = t.driver_depot
        for name in ("seat_tolerance_single", "seat_tolerance_coupled",
                     "bike_tolerance_single", "bike_tolerance_coupled"):
            if getattr(t, name) is not None:
                obj[name] = getattr(t, name)
        return obj

    def emu(r: EmuType) -> dict:
        return {"id": r.id, "seats": r.seats, "bike_slots": r.bike_slots,
                "cost_per_km": _num(r.cost_per_km), "couplable": r.couplable}

    def depot(d: Depot) -> dict:
        obj: dict[str, Any] = {"id": d.id, "station": d.station,
                               "out_min": dict(sorted(d.out_min.items())),
                               "out_max": dict(sorted(d.out_max.items()))}
        if d.in_max is not None:
            obj["in_min"] = dict(sorted((d.in_min or {}).items()))
            obj["in_max"] = dict(sorted(d.in_max.items()))
        return obj

    def window(w: DriverWindow) -> dict:
        obj: dict[str, Any] = {"depot": w.depot, "at": w.at,
                               "min_drivers": w.min_drivers,
                               "max_drivers": w.max_drivers}
        if w.license is not None:
            obj["license"] = w.license
        return obj

    data: dict[str, Any] = {
        "meta": dict(inst.meta),
        "alpha": _num(inst.alpha),
        "delta_min": inst.delta_min,
        "delta_max": inst.delta_max,
        "tolerances": {
            "seat_single": inst.seat_tolerance_single,
            "seat_coupled": inst.seat_tolerance_coupled,
            "bike_single": inst.bike_tolerance_single,
            "bike_coupled": inst.bike_tolerance_coupled,
        },
        "emu_types": [emu(r) for r in inst.emu_types],
        "depots": [depot(d) for d in inst.depots],
        "trips": [trip(t) for t in inst.trips],
        "driver_windows": [window(w) for w in inst.driver_windows],
    }
    if inst.licenses:
        data["licenses"] = {k: sorted(v) for k, v in sorted(inst.licenses.items())}
    return json.dumps(data, indent=2, sort_keys=False) + "\n"
