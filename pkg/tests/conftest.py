import pathlib

import pytest

from rollstock.generate import GeneratorConfig, generate_synthetic
from rollstock.ilp import encode_ilp
from rollstock.model import load_instance
from rollstock.netbuild import build_hypergraph
from rollstock.qubo import encode_qubo

REPO = pathlib.Path(__file__).resolve().parent.parent
TOY_PATH = REPO / "instances" / "toy.json"


@pytest.fixture(scope="session")
def toy_instance():
    return load_instance(str(TOY_PATH))


@pytest.fixture(scope="session")
def toy_graph(toy_instance):
    return build_hypergraph(toy_instance)


@pytest.fixture(scope="session")
def toy_ilp(toy_graph, toy_instance):
    return encode_ilp(toy_graph, toy_instance)


@pytest.fixture(scope="session")
def toy_qubo(toy_ilp):
    return encode_qubo(toy_ilp)


def toy_x(*ones):
    """Assignment vector over the 11 toy arcs with the given indices set."""
    return tuple(1 if i in ones else 0 for i in range(11))


def small_random_instance(seed, max_trips=12, with_couplable=True):
    """Deterministic small instances for oracle cross-checks."""
    cfg = GeneratorConfig(
        n_trips=2 + seed % (max_trips - 1),
        n_couplable=(seed % 4) if with_couplable else 0,
        n_depots=1 + seed % 2,
        n_types=1 + seed % 3,
        rotation_legs=(2, 4),
        cross_type_prob=0.5,
        with_return_bounds=(seed % 3 != 0),
    )
    cfg = GeneratorConfig(**{**cfg.__dict__,
                             "n_couplable": min(cfg.n_couplable, cfg.n_trips)})
    return generate_synthetic(cfg, seed=seed)
