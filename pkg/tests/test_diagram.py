from fractions import Fraction

import pytest

from rollstock.diagram import DiagramError, render_ascii, render_svg, trace_rotations
from rollstock.model import Depot, EmuType, Instance, Trip
from rollstock.netbuild import build_hypergraph


def test_toy_optimum_two_rotations_with_coupled_leg(toy_instance, toy_graph):
    rotations = trace_rotations(toy_graph, toy_instance, (0, 2, 10))
    assert len(rotations) == 2
    assert sorted(r.trips for r in rotations) == [("t1", "t3"), ("t2", "t3")]
    for rot in rotations:
        assert rot.coupled == (False, True)
        assert rot.emu_type == "r1"


def test_toy_excited_solution_draws_service_leg(toy_instance, toy_graph):
    rotations = trace_rotations(toy_graph, toy_instance, (0, 3, 6, 8))
    assert len(rotations) == 2
    assert sorted(r.trips for r in rotations) == [("t1", "t4"), ("t2", "t3")]
    assert all(not any(r.coupled) for r in rotations)


def test_svg_marks_coupling(toy_instance, toy_graph):
    svg = render_svg(toy_instance, toy_graph, (0, 2, 10))
    assert svg.startswith("<svg")
    assert "#2ca02c" in svg  # coupled stroke
    assert "2 rotation(s)" in svg
    plain = render_svg(toy_instance, toy_graph, (0, 3, 6, 8))
    assert "#2ca02c" not in plain


def test_renderings_are_deterministic(toy_instance, toy_graph):
    assert (render_svg(toy_instance, toy_graph, (0, 2, 10))
            == render_svg(toy_instance, toy_graph, (0, 2, 10)))
    assert (render_ascii(toy_instance, toy_graph, (0, 2, 10))
            == render_ascii(toy_instance, toy_graph, (0, 2, 10)))


def test_ascii_shows_coupled_marker(toy_instance, toy_graph):
    def grid_rows(art):
        return [ln for ln in art.splitlines() if not ln.endswith("segments")]

    art = render_ascii(toy_instance, toy_graph, (0, 2, 10))
    assert any("=" in row for row in grid_rows(art))
    art2 = render_ascii(toy_instance, toy_graph, (1, 2, 5, 9))
    assert not any("=" in row for row in grid_rows(art2))


def test_empty_solution_axes_only(toy_instance, toy_graph):
    svg = render_svg(toy_instance, toy_graph, ())
    assert "0 rotation(s)" in svg
    assert svg.count("<line") >= len({"A", "B"})  # station gridlines remain


def test_bad_arc_id_rejected(toy_instance, toy_graph):
    with pytest.raises(DiagramError):
        trace_rotations(toy_graph, toy_instance, (99,))


def decouple_instance():
    """Pre-coupled pair leaves the depot and splits into two single legs."""
    types = (EmuType(id="r", seats=100, cost_per_km=Fraction(1),
                     couplable=True),)
    trips = (
        Trip(id="p", origin="A", destination="B", depart=100, arrive=160,
             passengers=150, couplable=True, allowed_types=frozenset({"r"})),
        Trip(id="q1", origin="B", destination="C", depart=180, arrive=240,
             passengers=50, allowed_types=frozenset({"r"})),
        Trip(id="q2", origin="B", destination="D", depart=190, arrive=250,
             passengers=50, allowed_types=frozenset({"r"})),
    )
    return Instance(
        trips=trips, emu_types=types,
        depots=(Depot(id="d", station="A", out_max={"r": 2}),),
        delta_min=10, delta_max=60,
        seat_tolerance_single=10, seat_tolerance_coupled=20)


def test_decouple_tracing_splits_units():
    inst = decouple_instance()
    graph = build_hypergraph(inst)
    by_kind = {}
    for arc in graph.arcs:
        by_kind.setdefault(arc.kind, []).append(arc.id)
    pair_out = [a for a in by_kind["depot_out"] if graph.arcs[a].k == 2]
    assert pair_out and "decouple" in by_kind
    selected = (pair_out[0], by_kind["decouple"][0])
    rotations = trace_rotations(graph, inst, selected)
    assert len(rotations) == 2
    assert sorted(r.trips for r in rotations) == [("p", "q1"), ("p", "q2")]
    for rot in rotations:
        assert rot.coupled[0] is True and rot.coupled[1] is False
    svg = render_svg(inst, graph, selected)
    assert "#2ca02c" in svg
