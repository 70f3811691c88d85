"""Penalty-method QUBO compilation of the ILP, Ising form and decoding.

Constraint families map onto five penalty weights:

P1 (lambda1)  coverage equalities, squared
P2 (lambda2)  flow-balance equalities squared, plus out-degree rows squared
              with one slack bit each
P3 (lambda3)  depot dispatch/return ranges, squared with a unary slack
              chain of length (hi - lo)
P4 (lambda4)  capacity: a plain linear term per over-tolerance arc (not
              squared), so overcrowded-but-otherwise-valid plans stay low
              in the spectrum when lambda4 is chosen small
P5 (lambda5)  driver ranges, squared with unary slack chains

Slack variables are appended after the decision variables in ILP row
order, one unary chain per inequality row. All coefficients are exact
fractions; floats only appear at the sampler boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .ilp import FeasibilityReport, IlpModel, check_feasibility
from .model import Instance
from .netbuild import Hypergraph, size_bounds

__all__ = [
    "QuboModel",
    "IsingModel",
    "DecodedSample",
    "PenaltyRow",
    "encode_qubo",
    "qubo_energy",
    "to_ising",
    "ising_energy",
    "decode",
    "consistent_slacks",
    "slack_optimized_energy",
    "scaling_report",
    "ScalingReport",
    "export_qubo_coo",
    "export_ising_coo",
    "DEFAULT_LAMBDAS",
]

Rational = Union[int, float, str, Fraction]

DEFAULT_LAMBDAS = (Fraction(100),) * 5

_FAMILY_OF_KIND = {
    "coverage": 0,
    "flow_balance": 1,
    "out_degree": 1,
    "depot_out": 2,
    "depot_in": 2,
    "capacity_forbid": 3,
    "driver": 4,
}


@dataclass(frozen=True)
class PenaltyRow:
    """One squared penalty term: lambda * (coeffs.x + constant - sum slacks)^2."""

    family: int  # 0-based index into lambdas
    tag: str
    coeffs: tuple[tuple[int, int], ...]
    constant: int
    slack_indices: tuple[int, ...]

    def residual(self, x: Sequence[int]) -> int:
        return sum(c * x[v] for v, c in self.coeffs) + self.constant

    def best_slack_sum(self, x: Sequence[int]) -> int:
        return min(max(self.residual(x), 0), len(self.slack_indices))


@dataclass(frozen=True)
class QuboModel:
    """Upper-triangular sparse quadratic form over decision + slack bits."""

    num_decision: int
    num_slack: int
    q: dict[tuple[int, int], Fraction]
    offset: Fraction
    lambdas: tuple[Fraction, Fraction, Fraction, Fraction, Fraction]
    slack_map: dict[int, tuple[str, int]]  # slack index -> (row tag, position)
    decode_hint: dict[int, int]  # decision index -> arc id
    penalty_rows: tuple[PenaltyRow, ...] = ()
    capacity_vars: tuple[int, ...] = ()

    @property
    def num_vars(self) -> int:
        return self.num_decision + self.num_slack

    def num_terms(self) -> int:
        return len(self.q)


@dataclass(frozen=True)
class IsingModel:
    """Spin form: sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + offset."""

    num_vars: int
    h: dict[int, Fraction]
    j: dict[tuple[int, int], Fraction]
    offset: Fraction


@dataclass(frozen=True)
class DecodedSample:
    y: tuple[int, ...]
    energy: Fraction
    x: tuple[int, ...]
    slack_consistent: bool
    report: FeasibilityReport

    @property
    def feasible(self) -> bool:
        return self.report.feasible


def _as_lambdas(lambdas) -> tuple[Fraction, ...]:
    vals = tuple(Fraction(str(v)) if isinstance(v, float) else Fraction(v)
                 for v in lambdas)
    if len(vals) != 5:
        raise ValueError("expected exactly five penalty weights")
    if any(v < 0 for v in vals):
        raise ValueError("penalty weights must be nonnegative")
    return vals


def encode_qubo(model: IlpModel,
                lambdas: Sequence[Rational] = DEFAULT_LAMBDAS) -> QuboModel:
    """Compile the ILP into an unconstrained quadratic form."""
    lam = _as_lambdas(lambdas)
    n = model.num_vars
    q: dict[tuple[int, int], Fraction] = {}
    offset = Fraction(0)

    def add(i: int, j: int, value: Fraction) -> None:
        if i > j:
            i, j = j, i
        q[(i, j)] = q.get((i, j), Fraction(0)) + value

    for v, c in model.objective:
        add(v, v, c)
    offset += model.constant

    next_slack = n
    slack_map: dict[int, tuple[str, int]] = {}
    penalty_rows: list[PenaltyRow] = []
    capacity_vars: list[int] = []

    for row in model.constraints:
        kind = row.kind
        if kind not in _FAMILY_OF_KIND:
            raise ValueError(f"unsupported constraint kind {kind!r}")
        family = _FAMILY_OF_KIND[kind]
        weight = lam[family]

        if kind == "capacity_forbid":
            capacity_vars.extend(v for v, _ in row.coeffs)
            for v, _ in row.coeffs:
                add(v, v, weight)
            continue

        if row.relation == "=":
            constant = -row.rhs
            width = 0
        elif row.relation == "<=":
            constant = 0
            width = row.rhs
        else:
            constant = -row.lo
            width = row.hi - row.lo

        slacks = tuple(range(next_slack, next_slack + width))
        for pos, s in enumerate(slacks):
            slack_map[s] = (row.tag, pos)
        next_slack += width

        terms = [(v, c) for v, c in row.coeffs] + [(s, -1) for s in slacks]
        penalty_rows.append(PenaltyRow(
            family=family, tag=row.tag, coeffs=row.coeffs,
            constant=constant, slack_indices=slacks))

        # weight * (sum c_i y_i + constant)^2 expanded over binaries
        for a in range(len(terms)):
            va, ca = terms[a]
            add(va, va, weight * (ca * ca + 2 * constant * ca))
            for b in range(a + 1, len(terms)):
                vb, cb = terms[b]
                add(va, vb, 2 * weight * ca * cb)
        offset += weight * constant * constant

    q = {key: val for key, val in q.items() if val != 0}

    return QuboModel(
        num_decision=n,
        num_slack=next_slack - n,
        q=q,
        offset=offset,
        lambdas=lam,  # type: ignore[arg-type]
        slack_map=slack_map,
        decode_hint={v: v for v in range(n)},
        penalty_rows=tuple(penalty_rows),
        capacity_vars=tuple(capacity_vars),
    )


def qubo_energy(model: QuboModel, y: Sequence[int]) -> Fraction:
    if len(y) != model.num_vars:
        raise ValueError(f"assignment length {len(y)} != {model.num_vars}")
    total = model.offset
    for (i, j), value in model.q.items():
        if y[i] and y[j]:
            total += value
    return total


def to_ising(model: QuboModel) -> IsingModel:
    """Exact change of variables y = (s + 1) / 2 onto spins s in {-1, +1}."""
    h: dict[int, Fraction] = {}
    j: dict[tuple[int, int], Fraction] = {}
    offset = model.offset

    def add_h(i: int, value: Fraction) -> None:
        h[i] = h.get(i, Fraction(0)) + value

    for (a, b), value in model.q.items():
        if a == b:
            add_h(a, value / 2)
            offset += value / 2
        else:
            quarter = value / 4
            j[(a, b)] = j.get((a, b), Fraction(0)) + quarter
            add_h(a, quarter)
            add_h(b, quarter)
            offset += quarter

    return IsingModel(
        num_vars=model.num_vars,
        h={k: v for k, v in h.items() if v != 0},
        j={k: v for k, v in j.items() if v != 0},
        offset=offset)


def ising_energy(model: IsingModel, s: Sequence[int]) -> Fraction:
    if len(s) != model.num_vars:
        raise ValueError(f"spin vector length {len(s)} != {model.num_vars}")
    total = model.offset
    for i, value in model.h.items():
        total += value * s[i]
    for (i, j), value in model.j.items():
        total += value * s[i] * s[j]
    return total


def consistent_slacks(model: QuboModel, x: Sequence[int]) -> tuple[int, ...]:
    """Extend a decision assignment with energy-minimizing slack bits.

    Unary chains are degenerate (only the bit sum matters); the canonical
    choice fills each chain from its first position.
    """
    if len(x) != model.num_decision:
        raise ValueError(f"decision length {len(x)} != {model.num_decision}")
    y = list(int(v) for v in x) + [0] * model.num_slack
    for row in model.penalty_rows:
        fill = row.best_slack_sum(x)
        for s in row.slack_indices[:fill]:
            y[s] = 1
    return tuple(y)


def slack_optimized_energy(model: QuboModel, x: Sequence[int]) -> Fraction:
    """Minimum QUBO energy over all slack completions of ``x``."""
    return qubo_energy(model, consistent_slacks(model, x))


def decode(model: QuboModel, ilp: IlpModel, y: Sequence[int]) -> DecodedSample:
    """Split a sample into decision part, check it against the ILP."""
    if len(y) != model.num_vars:
        raise ValueError(f"assignment length {len(y)} != {model.num_vars}")
    y = tuple(int(v) for v in y)
    x = y[:model.num_decision]
    consistent = all(
        sum(y[s] for s in row.slack_indices) == row.best_slack_sum(x)
        for row in model.penalty_rows)
    return DecodedSample(
        y=y,
        energy=qubo_energy(model, y),
        x=x,
        slack_consistent=consistent,
        report=check_feasibility(ilp, x))


# ---------------------------------------------------------------------------
# Size and scaling metrics


@dataclass(frozen=True)
class ScalingReport:
    """Built sizes next to the worst-case analytic term bounds."""

    name: str
    n_trips: int
    n_single_only: int
    n_couplable: int
    n_depots: int
    n_types: int
    delta_min: int
    delta_max: int
    ilp_vars: int
    ilp_constraints: int
    qubo_vars: int
    qubo_slacks: int
    qubo_terms: int
    arc_var_bound: int        # |T'|^2 |R| + |T''|^3 |R|
    coverage_term_bound: int  # |T|^5 |R|^2
    continuity_term_bound: int
    depot_term_bound: int
    driver_term_bound: int

    @property
    def total_term_bound(self) -> int:
        return (self.coverage_term_bound + self.continuity_term_bound
                + self.depot_term_bound + self.driver_term_bound)


def scaling_report(instance: Instance, graph: Hypergraph, ilp: IlpModel,
                   qubo: Optional[QuboModel] = None,
                   name: str = "") -> ScalingReport:
    bounds = size_bounds(instance, graph)
    t = bounds.n_trips
    r = bounds.n_types
    d = len(instance.depots)
    biggest_depot = max(
        (max(list(dep.out_max.values()) + list((dep.in_max or {}).values()),
             default=0) for dep in instance.depots), default=0)
    max_drivers = max((w.max_drivers for w in instance.driver_windows), default=0)
    checkpoints = len({(w.depot, w.at) for w in instance.driver_windows})
    return ScalingReport(
        name=name or str(instance.meta.get("name", "")),
        n_trips=t,
        n_single_only=bounds.n_single_only,
        n_couplable=bounds.n_couplable,
        n_depots=d,
        n_types=r,
        delta_min=instance.delta_min,
        delta_max=instance.delta_max,
        ilp_vars=ilp.num_vars,
        ilp_constraints=len(ilp.constraints),
        qubo_vars=qubo.num_vars if qubo else 0,
        qubo_slacks=qubo.num_slack if qubo else 0,
        qubo_terms=qubo.num_terms() if qubo else 0,
        arc_var_bound=bounds.var_bound,
        coverage_term_bound=t ** 5 * r ** 2,
        continuity_term_bound=2 * r ** 3 * t ** 5,
        depot_term_bound=2 * r * t * (2 * r * t + biggest_depot) ** 2,
        driver_term_bound=d * checkpoints * (2 * r * t + max_drivers) ** 2,
    )


# ---------------------------------------------------------------------------
# Deterministic text exports


def _fmt(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    as_float = float(value)
    if Fraction(str(as_float)) == value:
        return str(as_float)
    return f"{value.numerator}/{value.denominator}"


def export_qubo_coo(model: QuboModel) -> str:
    """COO text: one `i j value` line per stored upper-triangular entry."""
    lines = [f"# qubo num_vars={model.num_vars} offset={_fmt(model.offset)}"]
    for (i, j) in sorted(model.q):
        lines.append(f"{i} {j} {_fmt(model.q[(i, j)])}")
    return "\n".join(lines) + "\n"


def export_ising_coo(model: IsingModel) -> str:
    """Same shape for the spin form; `i i value` lines carry the fields h_i."""
    lines = [f"# ising num_vars={model.num_vars} offset={_fmt(model.offset)}"]
    entries = [((i, i), v) for i, v in model.h.items()]
    entries += [(key, v) for key, v in model.j.items()]
    for (i, j), value in sorted(entries):
        lines.append(f"{i} {j} {_fmt(value)}")
    return "\n".join(lines) + "\n"
