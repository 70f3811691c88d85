"""Walk through the bundled toy instance end to end.

Three timetabled trips on a corridor A<->B, two EMU types at one depot,
an optional service return, and a single coupling opportunity at B.
The script builds the trip hypergraph, encodes the integer program,
solves it exactly and lists every feasible plan.
"""

from rollstock import (build_hypergraph, encode_ilp, enumerate_feasible,
                       load_instance, solve_exact)

inst = load_instance("instances/toy.json")
print(f"{len(inst.trips)} trips "
      f"({sum(t.obligatory for t in inst.trips)} obligatory), "
      f"{len(inst.emu_types)} EMU types, alpha = {inst.alpha}")

# ---------------------------------------------------------------------------
# The hypergraph: one node per trip plus a depot source; simple arcs move a
# single EMU between compatible trips, the final hyper-arc couples the two
# inbound units into one double composition for the heavy return trip.

graph = build_hypergraph(inst)
print(f"\n{len(graph.arcs)} candidate arcs:")
for arc in graph.arcs:
    pieces = "+".join(s.split(":")[1] for s in arc.sources)
    target = arc.targets[0].split(":")[1]
    print(f"  x{arc.id:<2} {arc.kind:<9} {pieces:>6} -> {target}  "
          f"type={arc.emu_type} k={arc.k} cost={arc.cost}")

# ---------------------------------------------------------------------------
# The ILP: coverage, flow balance, out-degree, depot ranges, the capacity
# forbid row (both single-r1 assignments to the crowded return exceed the
# seat-shortage tolerance) and two driver checkpoints.

model = encode_ilp(graph, inst)
print(f"\nILP: {model.num_vars} binary variables, "
      f"{len(model.constraints)} constraint rows")
capacity = next(r for r in model.constraints if r.kind == "capacity_forbid")
print(f"capacity row: {' + '.join(f'x{v}' for v, _ in capacity.coeffs)} = 0")

result = solve_exact(model)
print(f"\noptimum: objective {result.solution.objective} "
      f"= {float(result.solution.objective)}")
print(f"selected arcs: {['x%d' % a for a in result.solution.decoded]}")

# ---------------------------------------------------------------------------
# Dispatchers want alternatives, not just the optimum: the toy admits two
# excited plans that skip the coupling and burn a second rotation instead.

portfolio = enumerate_feasible(model)
print(f"\nall feasible plans ({len(portfolio.solutions)}):")
for sol in portfolio.solutions:
    print(f"  f = {float(sol.objective):<4} arcs = {list(sol.decoded)}")
