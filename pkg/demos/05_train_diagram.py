"""Render time-distance diagrams for the toy plans.

Classic timetable graphics: time left to right, stations top to bottom,
one polyline per EMU. The optimum couples both units onto the heavy
return trip (drawn green and doubled); the excited plan keeps them apart
and uses the optional service return instead.
"""

import pathlib

from rollstock import (build_hypergraph, encode_ilp, enumerate_feasible,
                       load_instance, render_ascii, render_svg)

inst = load_instance("instances/toy.json")
graph = build_hypergraph(inst)
portfolio = enumerate_feasible(encode_ilp(graph, inst))

out = pathlib.Path("diagrams")
out.mkdir(exist_ok=True)

for rank, sol in enumerate(portfolio.solutions):
    name = f"toy-plan-{rank}-f{float(sol.objective)}"
    svg = render_svg(inst, graph, sol.decoded)
    (out / f"{name}.svg").write_text(svg)
    print(f"=== {name}  (arcs {list(sol.decoded)})")
    print(render_ascii(inst, graph, sol.decoded, columns=72))

print(f"SVG files under {out}/")
