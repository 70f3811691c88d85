"""ILP encoding of the trip hypergraph and assignment evaluation.

One binary variable per (hyper-)arc. The objective charges alpha times the
operating cost of every selected arc plus one unit per EMU dispatched from
a depot. Constraint families:

coverage        each obligatory trip pointed to by exactly one arc
flow_balance    per (trip node, type): EMUs delivered equal EMUs removed
out_degree      at most one arc leaves a trip node (all types combined)
depot_out       per (depot, type): dispatched EMU count within bounds
depot_in        per (depot, type): returned EMU count within bounds
capacity_forbid arcs whose seat/bike shortage exceeds tolerance sum to zero
driver          per (depot, checkpoint[, license]): en-route EMUs within bounds

Flow balance weights each incoming arc by the EMUs it places on the node's
trip and each outgoing arc by the EMUs it removes; a coupling hyper-arc
therefore counts once at each feeder trip and twice at the coupled trip.
Nodes without outgoing arcs are day-end rests and get no balance row.

Driver rows weight arcs by en-route EMUs (``per_emu``) or en-route trains
(``per_train``); both readings keep the reference instances' optima intact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import Instance
from .netbuild import Hypergraph

__all__ = [
    "ConstraintRow",
    "IlpModel",
    "Violation",
    "FeasibilityReport",
    "encode_ilp",
    "encode_licensed_drivers",
    "objective_value",
    "check_feasibility",
    "export_lp",
    "CONSTRAINT_KINDS",
]

CONSTRAINT_KINDS = ("coverage", "flow_balance", "out_degree", "depot_out",
                    "depot_in", "capacity_forbid", "driver")


@dataclass(frozen=True)
class ConstraintRow:
    """A sparse integer row: coeffs . x  (= rhs | <= rhs | in [lo, hi])."""

    kind: str
    coeffs: tuple[tuple[int, int], ...]  # (var index, integer coefficient)
    relation: str  # "=", "<=", "range"
    rhs: int = 0
    lo: int = 0
    hi: int = 0
    tag: str = ""

    def bounds(self) -> tuple[Optional[int], int]:
        if self.relation == "=":
            return self.rhs, self.rhs
        if self.relation == "<=":
            return None, self.rhs
        return self.lo, self.hi

    def lhs(self, x: Sequence[int]) -> int:
        return sum(c * x[v] for v, c in self.coeffs)


@dataclass(frozen=True)
class IlpModel:
    """Binary program over arcs; variable i corresponds to arc id i."""

    num_vars: int
    objective: tuple[tuple[int, Fraction], ...]
    constraints: tuple[ConstraintRow, ...]
    constant: Fraction = Fraction(0)

    def objective_dense(self) -> list[Fraction]:
        dense = [Fraction(0)] * self.num_vars
        for v, c in self.objective:
            dense[v] += c
        return dense


@dataclass(frozen=True)
class Violation:
    tag: str
    lhs: int
    lo: Optional[int]
    hi: int


@dataclass(frozen=True)
class FeasibilityReport:
    """Violations grouped by constraint family; feasible iff all lists empty."""

    violations: dict[str, tuple[Violation, ...]] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def families(self) -> tuple[str, ...]:
        return tuple(sorted(self.violations))

    def count(self) -> int:
        return sum(len(v) for v in self.violations.values())


def _check_len(x: Sequence[int], num_vars: int) -> None:
    if len(x) != num_vars:
        raise ValueError(f"assignment length {len(x)} != num_vars {num_vars}")


def driver_row_weight(arc_k: int, running: int, weighting: str) -> int:
    if weighting == "per_emu":
        return arc_k * running
    if weighting == "per_train":
        return running
    raise ValueError(f"unknown driver weighting {weighting!r}")


def encode_ilp(graph: Hypergraph, instance: Instance,
               driver_weighting: str = "per_emu") -> IlpModel:
    """Encode the hypergraph as a binary linear program."""
    arcs = graph.arcs
    objective: list[tuple[int, Fraction]] = []
    for arc in arcs:
        coeff = instance.alpha * arc.cost
        if arc.kind == "depot_out":
            coeff += arc.k_prime
        if coeff:
            objective.append((arc.id, coeff))

    rows: list[ConstraintRow] = []

    for trip in instance.trips:
        if not trip.obligatory:
            continue
        support = graph.idx_cover.get(trip.id, ())
        rows.append(ConstraintRow(
            kind="coverage", relation="=", rhs=1,
            coeffs=tuple((a, 1) for a in support),
            tag=f"cover[{trip.id}]"))

    for trip in instance.trips:
        node_id = graph.trip_node_id(trip.id)
        if not graph.outgoing(node_id):
            continue  # terminal node: EMUs rest here at day end
        for emu in instance.emu_types:
            incoming = graph.idx_in.get((node_id, emu.id), ())
            outgoing = graph.idx_out.get((node_id, emu.id), ())
            if not incoming and not outgoing:
                continue
            coeffs: dict[int, int] = {}
            for a in incoming:
                coeffs[a] = coeffs.get(a, 0) + arcs[a].k
            for a in outgoing:
                coeffs[a] = coeffs.get(a, 0) - arcs[a].k_prime
            coeffs = {a: c for a, c in coeffs.items() if c}
            rows.append(ConstraintRow(
                kind="flow_balance", relation="=", rhs=0,
                coeffs=tuple(sorted(coeffs.items())),
                tag=f"flow[{trip.id},{emu.id}]"))

    for trip in instance.trips:
        node_id = graph.trip_node_id(trip.id)
        outgoing = graph.outgoing(node_id)
        if not outgoing:
            continue
        rows.append(ConstraintRow(
            kind="out_degree", relation="<=", rhs=1,
            coeffs=tuple((a, 1) for a in outgoing),
            tag=f"outdeg[{trip.id}]"))

    for depot in instance.depots:
        for emu in instance.emu_types:
            support = graph.idx_depot_out.get((depot.id, emu.id), ())
            lo, hi = depot.out_bounds(emu.id)
            if not support and lo == 0:
                continue
            rows.append(ConstraintRow(
                kind="depot_out", relation="range", lo=lo, hi=hi,
                coeffs=tuple((a, arcs[a].k_prime) for a in support),
                tag=f"depot_out[{depot.id},{emu.id}]"))

    for depot in instance.depots:
        if not depot.has_sink:
            continue
        for emu in instance.emu_types:
            support = graph.idx_depot_in.get((depot.id, emu.id), ())
            lo, hi = depot.in_bounds(emu.id)
            if not support and lo == 0:
                continue
            rows.append(ConstraintRow(
                kind="depot_in", relation="range", lo=lo, hi=hi,
                coeffs=tuple((a, arcs[a].k) for a in support),
                tag=f"depot_in[{depot.id},{emu.id}]"))

    def exceeds_tolerance(arc) -> bool:
        target_trips = [graph.node(t).trip for t in arc.targets]
        for trip_id, seats, bikes in zip(target_trips, arc.seat_shortages,
                                         arc.bike_shortages):
            trip = instance.trip_by_id(trip_id) if trip_id else None
            if seats > instance.seat_tolerance(arc.k, trip):
                return True
            if bikes > instance.bike_tolerance(arc.k, trip):
                return True
        return False

    over_capacity = sorted(arc.id for arc in arcs if exceeds_tolerance(arc))
    if over_capacity:
        rows.append(ConstraintRow(
            kind="capacity_forbid", relation="=", rhs=0,
            coeffs=tuple((a, 1) for a in over_capacity),
            tag="capacity"))

    for window in instance.driver_windows:
        if window.license is not None:
            continue  # licensed windows are encoded by encode_licensed_drivers
        members = graph.driver_members.get((window.depot, window.at), ())
        if not members and window.min_drivers == 0:
            continue
        coeffs = tuple(
            (a, driver_row_weight(arcs[a].k, running, driver_weighting))
            for a, running in members)
        rows.append(ConstraintRow(
            kind="driver", relation="range",
            lo=window.min_drivers, hi=window.max_drivers,
            coeffs=coeffs,
            tag=f"driver[{window.depot},{window.at}]"))

    rows.extend(encode_licensed_drivers(graph, instance, driver_weighting))

    return IlpModel(num_vars=len(arcs), objective=tuple(objective),
                    constraints=tuple(rows))


def encode_licensed_drivers(graph: Hypergraph, instance: Instance,
                            driver_weighting: str = "per_emu"
                            ) -> tuple[ConstraintRow, ...]:
    """Driver rows restricted to arcs whose EMU type a license covers."""
    arcs = graph.arcs
    rows = []
    for window in instance.driver_windows:
        if window.license is None:
            continue
        covered = instance.license_types(window.license)
        members = [(a, running)
                   for a, running in graph.driver_members.get(
                       (window.depot, window.at), ())
                   if arcs[a].emu_type in covered]
        if not members and window.min_drivers == 0:
            continue
        coeffs = tuple(
            (a, driver_row_weight(arcs[a].k, running, driver_weighting))
            for a, running in members)
        rows.append(ConstraintRow(
            kind="driver", relation="range",
            lo=window.min_drivers, hi=window.max_drivers,
            coeffs=coeffs,
            tag=f"driver[{window.depot},{window.at},{window.license}]"))
    return tuple(rows)


def objective_value(model: IlpModel, x: Sequence[int]) -> Fraction:
    _check_len(x, model.num_vars)
    return sum((c for v, c in model.objective if x[v]), model.constant)


def check_feasibility(model: IlpModel, x: Sequence[int]) -> FeasibilityReport:
    _check_len(x, model.num_vars)
    violations: dict[str, list[Violation]] = {}
    for row in model.constraints:
        lhs = row.lhs(x)
        lo, hi = row.bounds()
        if (lo is not None and lhs < lo) or lhs > hi:
            violations.setdefault(row.kind, []).append(
                Violation(tag=row.tag, lhs=lhs, lo=lo, hi=hi))
    return FeasibilityReport({k: tuple(v) for k, v in violations.items()})


# ---------------------------------------------------------------------------
# LP file export (CPLEX-LP dialect)


def _lp_number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    as_float = float(value)
    if Fraction(str(as_float)) == value:
        return str(as_float)
    return repr(as_float)


def _lp_expr(coeffs: Iterable[tuple[int, Fraction]]) -> str:
    parts = []
    for var, coeff in coeffs:
        if coeff == 0:
            continue
        sign = "-" if coeff < 0 else "+"
        parts.append(f"{sign} {_lp_number(abs(Fraction(coeff)))} x{var}")
    if not parts:
        return "0 x0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _lp_name(tag: str, fallback: str) -> str:
    name = "".join(ch if ch.isalnum() or ch in "_" else "_" for ch in tag)
    return name or fallback


def export_lp(model: IlpModel, name: str = "rollstock") -> str:
    """Serialize in LP file format with deterministic x{arc_id} naming."""
    lines = [f"\\ Problem: {name}", "Minimize"]
    lines.append(" obj: " + _lp_expr(model.objective))
    lines.append("Subject To")
    for i, row in enumerate(model.constraints):
        base = _lp_name(row.tag, f"c{i}")
        expr = _lp_expr((v, Fraction(c)) for v, c in row.coeffs)
        if row.relation == "=":
            lines.append(f" {base}: {expr} = {row.rhs}")
        elif row.relation == "<=":
            lines.append(f" {base}: {expr} <= {row.rhs}")
        else:
            if row.lo > 0:
                lines.append(f" {base}_lo: {expr} >= {row.lo}")
            lines.append(f" {base}_hi: {expr} <= {row.hi}")
    lines.append("Bounds")
    for v in range(model.num_vars):
        lines.append(f" 0 <= x{v} <= 1")
    lines.append("Binary")
    if model.num_vars:
        lines.append(" " + " ".join(f"x{v}" for v in range(model.num_vars)))
    lines.append("End")
    return "\n".join(lines) + "\n"
