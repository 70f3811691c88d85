import json
from fractions import Fraction

import pytest

from rollstock.generate import GeneratorConfig, GeneratorError, generate_synthetic
from rollstock.model import (Depot, EmuType, Instance, InstanceError, Trip,
                             loads_instance, serialize_instance)

from conftest import TOY_PATH, small_random_instance


def test_toy_loads_with_expected_shape(toy_instance):
    assert len(toy_instance.obligatory_trips) == 3
    assert len(toy_instance.trips) == 4  # three timetabled + one service
    assert len(toy_instance.emu_types) == 2
    assert len(toy_instance.depots) == 1
    assert len(toy_instance.driver_windows) == 2
    assert toy_instance.alpha == Fraction(1, 100)
    assert toy_instance.delta_min == 10
    assert toy_instance.delta_max == 60
    t4 = toy_instance.trip_by_id("t4")
    assert not t4.obligatory and t4.passengers == 0
    assert toy_instance.trip_by_id("t3").couplable
    assert not toy_instance.type_by_id("r2").couplable


def test_empty_instance_is_valid():
    inst = loads_instance(json.dumps({
        "alpha": 0, "delta_min": 0, "delta_max": 0,
        "emu_types": [{"id": "r1", "seats": 10}],
        "depots": [{"id": "d", "station": "A", "out_max": {"r1": 1}}],
        "trips": [],
    }))
    assert inst.trips == ()
    assert len(inst.depots) == 1


def test_dangling_type_reference_reports_path():
    data = json.loads(TOY_PATH.read_text())
    data["trips"][0]["allowed_types"] = ["r9"]
    with pytest.raises(InstanceError) as err:
        loads_instance(json.dumps(data))
    assert "/trips/0/allowed_types" in str(err.value)
    assert "r9" in str(err.value)


def test_dangling_depot_reference():
    data = json.loads(TOY_PATH.read_text())
    data["driver_windows"][0]["depot"] = "nowhere"
    with pytest.raises(InstanceError) as err:
        loads_instance(json.dumps(data))
    assert "/driver_windows/0/depot" in str(err.value)


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d["trips"][0].update(arrive=d["trips"][0]["depart"]),
     "/trips/0/arrive"),
    (lambda d: d["trips"][1].update(passengers=-1), "/trips/1/passengers"),
    (lambda d: d.update(delta_min=999), "/delta_min"),
    (lambda d: d["driver_windows"][0].update(min_drivers=5),
     "/driver_windows/0/min_drivers"),
    (lambda d: d["trips"][0].pop("depart"), "/trips/0/depart"),
    (lambda d: d["emu_types"][0].update(seats=0), "/emu_types/0/seats"),
])
def test_invariant_violations_report_paths(mutate, path):
    data = json.loads(TOY_PATH.read_text())
    mutate(data)
    with pytest.raises(InstanceError) as err:
        loads_instance(json.dumps(data))
    assert path in str(err.value)


def test_obligatory_trip_needs_allowed_types():
    with pytest.raises(InstanceError) as err:
        Instance(
            trips=(Trip(id="t", origin="A", destination="B", depart=0,
                        arrive=10, passengers=0, allowed_types=frozenset()),),
            emu_types=(EmuType(id="r1", seats=10),),
            depots=(Depot(id="d", station="A", out_max={"r1": 1}),))
    assert "allowed_types" in str(err.value)


def test_roundtrip_on_toy(toy_instance):
    assert loads_instance(serialize_instance(toy_instance)) == toy_instance


def test_load_from_open_byte_stream(toy_instance):
    from rollstock.model import load_instance
    with open(TOY_PATH, "rb") as fh:
        assert load_instance(fh) == toy_instance


@pytest.mark.parametrize("seed", range(1, 13))
def test_roundtrip_and_validity_on_generated(seed):
    inst = small_random_instance(seed)
    text = serialize_instance(inst)
    assert loads_instance(text) == inst


def test_fraction_values_survive_roundtrip():
    inst = Instance(
        trips=(Trip(id="t", origin="A", destination="B", depart=0, arrive=10,
                    passengers=1, allowed_types=frozenset({"r1"}),
                    distance=Fraction(1, 3)),),
        emu_types=(EmuType(id="r1", seats=10, cost_per_km=Fraction(7, 3)),),
        depots=(Depot(id="d", station="A", out_max={"r1": 1}),),
        alpha=Fraction(1, 7))
    again = loads_instance(serialize_instance(inst))
    assert again.alpha == Fraction(1, 7)
    assert again.trips[0].distance == Fraction(1, 3)
    assert again.emu_types[0].cost_per_km == Fraction(7, 3)


def test_generator_is_deterministic():
    cfg = GeneratorConfig(n_trips=30, delta_max=60)
    a = serialize_instance(generate_synthetic(cfg, seed=7))
    b = serialize_instance(generate_synthetic(cfg, seed=7))
    assert a == b
    c = serialize_instance(generate_synthetic(cfg, seed=8))
    assert a != c


def test_generator_single_type_single_depot_shape():
    cfg = GeneratorConfig(n_trips=30, n_couplable=0, n_depots=1, n_types=1,
                          delta_min=5, delta_max=60)
    inst = generate_synthetic(cfg, seed=7)
    assert len(inst.trips) == 30
    assert all(t.obligatory for t in inst.trips)
    assert sum(t.couplable for t in inst.trips) == 0
    assert len(inst.emu_types) == 1
    assert len(inst.depots) == 1
    assert inst.delta_max == 60


def test_generator_rejects_degenerate_params():
    with pytest.raises(GeneratorError):
        generate_synthetic(GeneratorConfig(n_trips=0), seed=1)
    with pytest.raises(GeneratorError):
        generate_synthetic(GeneratorConfig(n_trips=3, n_couplable=5), seed=1)
    with pytest.raises(GeneratorError):
        generate_synthetic(GeneratorConfig(n_trips=3, n_depots=0), seed=1)


def test_generator_odd_trip_count():
    inst = generate_synthetic(GeneratorConfig(n_trips=11), seed=3)
    assert len(inst.trips) == 11


def test_driver_depot_defaults():
    inst = loads_instance(TOY_PATH.read_text())
    # single depot: every trip is assigned to it implicitly
    for trip in inst.trips:
        assert inst.driver_depot_of(trip) == "depA"
