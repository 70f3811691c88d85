import dataclasses
from fractions import Fraction

import pytest

from rollstock.anneal import AnnealParams, anneal, sample_portfolio
from rollstock.exact import solve_exact
from rollstock.ilp import check_feasibility, encode_ilp
from rollstock.generate import GeneratorConfig, generate_synthetic
from rollstock.netbuild import build_hypergraph
from rollstock.qubo import DEFAULT_LAMBDAS, QuboModel, qubo_energy

GROUND = Fraction(24, 5)


def test_params_validation():
    with pytest.raises(ValueError):
        AnnealParams(num_reads=0)
    with pytest.raises(ValueError):
        AnnealParams(beta_min=2.0, beta_max=1.0)
    AnnealParams(sweeps=0, beta_min=1.0, beta_max=1.0)  # frozen limit allowed


def test_determinism(toy_qubo):
    params = AnnealParams(num_reads=20, sweeps=200, seed=9)
    a = anneal(toy_qubo, params)
    b = anneal(toy_qubo, params)
    assert a == b
    c = anneal(toy_qubo, AnnealParams(num_reads=20, sweeps=200, seed=10))
    assert a != c


def test_single_negative_variable_found_in_one_read():
    model = QuboModel(num_decision=1, num_slack=0, q={(0, 0): Fraction(-3)},
                      offset=Fraction(0), lambdas=DEFAULT_LAMBDAS,
                      slack_map={}, decode_hint={0: 0})
    result = anneal(model, AnnealParams(num_reads=1, sweeps=50, seed=0))
    assert result.lowest().y == (1,)
    assert result.lowest().energy == Fraction(-3)


def test_zero_sweeps_returns_initial_states(toy_qubo):
    import numpy as np
    params = AnnealParams(num_reads=5, sweeps=0, beta_min=1.0, beta_max=1.0,
                          seed=4)
    result = anneal(toy_qubo, params)
    expected = []
    for r in range(5):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([4, r])))
        expected.append(tuple(int(v) for v in rng.integers(0, 2, 20)))
    got = []
    for entry in result.entries:
        got.extend([entry.y] * entry.multiplicity)
        assert entry.energy == qubo_energy(toy_qubo, entry.y)
    assert sorted(got) == sorted(expected)


def test_empty_model_rejected():
    model = QuboModel(num_decision=0, num_slack=0, q={}, offset=Fraction(0),
                      lambdas=DEFAULT_LAMBDAS, slack_map={}, decode_hint={})
    with pytest.raises(ValueError):
        anneal(model, AnnealParams(num_reads=1, sweeps=1))


def test_toy_ground_state_recovered(toy_qubo):
    result = anneal(toy_qubo, AnnealParams(num_reads=100, sweeps=1000, seed=1))
    assert result.lowest().energy == GROUND


def test_sample_energies_match_recompute(toy_qubo):
    result = anneal(toy_qubo, AnnealParams(num_reads=30, sweeps=100, seed=2))
    for entry in result.entries:
        assert entry.energy == qubo_energy(toy_qubo, entry.y)
    assert sum(e.multiplicity for e in result.entries) == 30


def test_portfolio_matches_known_feasible_set(toy_instance):
    run = sample_portfolio(toy_instance, params=AnnealParams(seed=1))
    objectives = [float(s.objective) for s in run.portfolio.solutions]
    assert objectives == [4.8, 5.6, 5.6]
    assert {s.decoded for s in run.portfolio.solutions} == {
        (0, 2, 10), (0, 3, 6, 8), (1, 2, 5, 9)}


def test_portfolio_and_rejects_are_consistent(toy_instance, toy_ilp):
    run = sample_portfolio(toy_instance, params=AnnealParams(seed=3))
    for sol in run.portfolio.solutions:
        assert check_feasibility(toy_ilp, sol.x).feasible
    for rej in run.rejected:
        assert not check_feasibility(toy_ilp, rej.x).feasible
        assert rej.violated_families


def test_infeasible_instance_yields_empty_portfolio(toy_instance):
    # no admissible EMU type can reach trip t3 in time: forbid its types
    trips = tuple(
        dataclasses.replace(t, allowed_types=frozenset({"r2"}))
        if t.id == "t3" else t
        for t in toy_instance.trips)
    # r2 cannot couple and only one unit exists, but two A->B trips remain
    depots = tuple(dataclasses.replace(d, out_max={"r1": 0, "r2": 1})
                   for d in toy_instance.depots)
    inst = dataclasses.replace(toy_instance, trips=trips, depots=depots)
    model = encode_ilp(build_hypergraph(inst), inst)
    assert solve_exact(model).status == "infeasible"
    run = sample_portfolio(inst, params=AnnealParams(num_reads=20, sweeps=300,
                                                     seed=0))
    assert run.portfolio.solutions == ()
    assert run.rejected


def test_success_rate_monotone_in_sweeps(toy_qubo):
    """Averaged over 20 seeds, more sweeps never hurt ground-state recovery."""
    rates = []
    for sweeps in (8, 64, 512):
        hits = 0
        reads = 0
        for seed in range(20):
            result = anneal(toy_qubo, AnnealParams(
                num_reads=25, sweeps=sweeps, beta_min=0.05, seed=seed))
            hits += sum(e.multiplicity for e in result.entries
                        if e.energy == GROUND)
            reads += result.num_reads
        rates.append(hits / reads)
    assert rates == sorted(rates)
    assert rates[-1] > 0


def test_synthetic_portfolio_near_exact_optimum():
    inst = generate_synthetic(
        GeneratorConfig(n_trips=20, n_couplable=4, n_types=1, n_depots=1),
        seed=2)
    model = encode_ilp(build_hypergraph(inst), inst)
    exact = solve_exact(model)
    assert exact.status == "optimal"
    run = sample_portfolio(
        inst, params=AnnealParams(num_reads=60, sweeps=1500, beta_min=0.05,
                                  beta_max=20.0, seed=7))
    assert run.portfolio.solutions, "sampler found no feasible plan"
    best = float(run.portfolio.solutions[0].objective)
    assert best <= float(exact.solution.objective) * 1.05
