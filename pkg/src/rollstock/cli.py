"""Command-line front end.

Subcommands: validate, generate, solve-ilp, solve-qubo, enumerate, report,
diagram, export-lp, export-qubo. Artifact files (JSON/CSV/SVG/LP/COO) are
byte-stable for fixed inputs and seeds; wall-clock timings go to stdout
only. ``ROLLSTOCK_LOG`` selects the log level.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .anneal import AnnealParams, sample_portfolio
from .diagram import render_ascii, render_svg
from .exact import SolutionPortfolio, SolveResult, enumerate_feasible, solve_exact
from .generate import GeneratorConfig, GeneratorError, generate_synthetic
from .ilp import IlpModel, encode_ilp, export_lp
from .model import Instance, InstanceError, load_instance, serialize_instance
from .netbuild import Hypergraph, build_hypergraph, to_dot
from .qubo import (DEFAULT_LAMBDAS, encode_qubo, export_ising_coo,
                   export_qubo_coo, scaling_report, to_ising)

log = logging.getLogger("rollstock")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_TIME_LIMIT = 3


def _frac_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _add_instance_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--alpha", type=_frac_arg, default=None,
                   help="override the objective weight alpha")
    p.add_argument("--delta-max", type=int, default=None,
                   help="override the maximum turnaround window (arc pruning)")
    p.add_argument("--driver-weighting", choices=("per_emu", "per_train"),
                   default="per_emu",
                   help="weight driver rows by en-route EMUs or trains")


def _add_lambda_opts(p: argparse.ArgumentParser) -> None:
    for i in range(1, 6):
        p.add_argument(f"--lambda{i}", type=_frac_arg, default=None,
                       help=f"penalty weight lambda{i} (default 100)")


def _add_out_opt(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None,
                   help="output directory for artifact files")


def _load(args) -> Instance:
    inst = load_instance(args.instance)
    overrides = {}
    if getattr(args, "alpha", None) is not None:
        overrides["alpha"] = args.alpha
    if getattr(args, "delta_max", None) is not None:
        overrides["delta_max"] = args.delta_max
    if overrides:
        inst = dataclasses.replace(inst, **overrides)
    return inst


def _lambdas(args) -> tuple:
    return tuple(
        getattr(args, f"lambda{i}") if getattr(args, f"lambda{i}") is not None
        else DEFAULT_LAMBDAS[i - 1]
        for i in range(1, 6))


def _outdir(args) -> Optional[Path]:
    if args.out is None:
        return None
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(outdir: Optional[Path], name: str, text: str) -> None:
    if outdir is None:
        return
    target = outdir / name
    target.write_text(text, encoding="utf-8")
    print(f"wrote {target}")


def _num_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _arc_record(graph: Hypergraph, arc_id: int) -> dict:
    arc = graph.arcs[arc_id]
    return {
        "id": arc.id,
        "kind": arc.kind,
        "sources": list(arc.sources),
        "targets": list(arc.targets),
        "emu_type": arc.emu_type,
        "k": arc.k,
        "k_prime": arc.k_prime,
        "cost": str(arc.cost),
    }


def _solution_json(instance: Instance, graph: Hypergraph, model: IlpModel,
                   result: SolveResult) -> str:
    payload: dict = {
        "instance": instance.meta.get("name", ""),
        "alpha": _num_str(instance.alpha),
        "status": result.status,
        "nodes": result.nodes,
    }
    if result.solution is not None:
        sol = result.solution
        payload["objective"] = _num_str(sol.objective)
        payload["objective_float"] = float(sol.objective)
        payload["selected_arcs"] = [_arc_record(graph, a) for a in sol.decoded]
        payload["feasible"] = sol.report.feasible
        payload["constraints"] = {
            row.kind: sum(1 for r in model.constraints if r.kind == row.kind)
            for row in model.constraints}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _portfolio_json(instance: Instance, graph: Hypergraph,
                    portfolio: SolutionPortfolio) -> str:
    payload = {
        "instance": instance.meta.get("name", ""),
        "exhaustive": portfolio.exhaustive,
        "solutions": [
            {
                "objective": _num_str(s.objective),
                "objective_float": float(s.objective),
                "selected_arcs": [_arc_record(graph, a) for a in s.decoded],
            }
            for s in portfolio.solutions
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    inst = _load(args)
    obligatory = sum(1 for t in inst.trips if t.obligatory)
    print(f"valid: {len(inst.trips)} trips ({obligatory} obligatory), "
          f"{len(inst.emu_types)} EMU types, {len(inst.depots)} depots, "
          f"{len(inst.driver_windows)} driver windows")
    return EXIT_OK


def cmd_generate(args) -> int:
    cfg = GeneratorConfig(
        n_trips=args.trips, n_couplable=args.couplable,
        n_depots=args.depots, n_types=args.types,
        delta_min=args.delta_min, delta_max=args.delta_max,
        alpha=args.alpha if args.alpha is not None else Fraction(1, 100),
        with_return_bounds=not args.no_return_bounds)
    inst = generate_synthetic(cfg, seed=args.seed)
    text = serialize_instance(inst)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output} ({len(inst.trips)} trips)")
    return EXIT_OK


def cmd_solve_ilp(args) -> int:
    inst = _load(args)
    tic = time.monotonic()
    graph = build_hypergraph(inst)
    model = encode_ilp(graph, inst, driver_weighting=args.driver_weighting)
    build_secs = time.monotonic() - tic
    tic = time.monotonic()
    result = solve_exact(model, time_limit=args.time_limit)
    solve_secs = time.monotonic() - tic

    outdir = _outdir(args)
    _write(outdir, "solution.json", _solution_json(inst, graph, model, result))
    if args.emit_lp:
        _write(outdir, "model.lp", export_lp(model))
    if args.emit_dot:
        _write(outdir, "hypergraph.dot", to_dot(graph))

    print(f"arcs={len(graph.arcs)} rows={len(model.constraints)} "
          f"build={build_secs:.3f}s solve={solve_secs:.3f}s nodes={result.nodes}")
    if result.solution is not None:
        print(f"status={result.status} objective={float(result.solution.objective)}")
    else:
        print(f"status={result.status}")
    if result.status == "optimal":
        return EXIT_OK
    if result.status == "infeasible":
        return EXIT_INFEASIBLE
    return EXIT_TIME_LIMIT


def cmd_solve_qubo(args) -> int:
    inst = _load(args)
    params = AnnealParams(
        num_reads=args.reads, sweeps=args.sweeps,
        beta_min=args.beta_min, beta_max=args.beta_max, seed=args.seed)
    run = sample_portfolio(
        inst, lambdas=_lambdas(args), params=params,
        driver_weighting=args.driver_weighting)
    graph = build_hypergraph(inst)

    outdir = _outdir(args)
    _write(outdir, "portfolio.json", _portfolio_json(inst, graph, run.portfolio))
    rejected_payload = [
        {
            "x": list(r.x),
            "energy": str(r.energy),
            "energy_float": float(r.energy),
            "multiplicity": r.multiplicity,
            "violated_families": list(r.violated_families),
            "slack_consistent": r.slack_consistent,
        }
        for r in run.rejected
    ]
    _write(outdir, "rejected.json",
           json.dumps(rejected_payload, indent=2, sort_keys=True) + "\n")

    for stage, secs in run.timings.items():
        print(f"{stage}={secs:.3f}s")
    print(f"samples={len(run.samples.entries)} feasible={len(run.portfolio.solutions)} "
          f"rejected={len(run.rejected)} "
          f"success_rate={run.success_rate:.3f} (share of reads at the lowest "
          f"sampled energy)")
    if run.portfolio.solutions:
        best = run.portfolio.solutions[0]
        print(f"best objective={float(best.objective)} arcs={list(best.decoded)}")
    else:
        print("no feasible sample; increase --reads/--sweeps")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    inst = _load(args)
    graph = build_hypergraph(inst)
    model = encode_ilp(graph, inst, driver_weighting=args.driver_weighting)
    portfolio = enumerate_feasible(model, max_count=args.max_count)
    _write(_outdir(args), "portfolio.json",
           _portfolio_json(inst, graph, portfolio))
    print(f"feasible={len(portfolio.solutions)} exhaustive={portfolio.exhaustive}")
    for sol in portfolio.solutions[:args.show]:
        print(f"  objective={float(sol.objective)} arcs={list(sol.decoded)}")
    return EXIT_OK


def cmd_report(args) -> int:
    columns = ["instance", "|T|", "|T'|/|T''|", "|D|", "|R|", "delta",
               "Delta", "ILP vars", "QUBO vars/terms"]
    rows = []
    for path in args.instances:
        inst = load_instance(path)
        if args.alpha is not None:
            inst = dataclasses.replace(inst, alpha=args.alpha)
        if args.delta_max is not None:
            inst = dataclasses.replace(inst, delta_max=args.delta_max)
        graph = build_hypergraph(inst)
        model = encode_ilp(graph, inst)
        qubo = encode_qubo(model, _lambdas(args))
        rep = scaling_report(inst, graph, model, qubo,
                             name=str(inst.meta.get("name", path)))
        rows.append([
            rep.name, str(rep.n_trips),
            f"{rep.n_single_only}/{rep.n_couplable}",
            str(rep.n_depots), str(rep.n_types), str(rep.delta_min),
            str(rep.delta_max), str(rep.ilp_vars),
            f"{rep.qubo_vars}/{rep.qubo_terms}",
        ])

    if args.format == "csv":
        lines = [",".join(columns)] + [",".join(row) for row in rows]
    else:
        widths = [max(len(col), *(len(r[i]) for r in rows))
                  if rows else len(col) for i, col in enumerate(columns)]
        header = " | ".join(c.ljust(w) for c, w in zip(columns, widths))
        sep = "-|-".join("-" * w for w in widths)
        lines = [header, sep] + [
            " | ".join(v.ljust(w) for v, w in zip(row, widths)) for row in rows]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    _write(_outdir(args), f"report.{args.format}", text)
    return EXIT_OK


def cmd_diagram(args) -> int:
    inst = _load(args)
    graph = build_hypergraph(inst)
    payload = json.loads(Path(args.solution).read_text(encoding="utf-8"))
    arcs = payload.get("selected_arcs")
    if arcs is None and payload.get("solutions"):
        arcs = payload["solutions"][0]["selected_arcs"]
    if arcs is None:
        print("solution file contains no selected arcs", file=sys.stderr)
        return EXIT_ERROR
    selected = [a["id"] for a in arcs]
    for record in arcs:
        arc_id = record["id"]
        if arc_id >= len(graph.arcs) or (
                record.get("emu_type") is not None
                and graph.arcs[arc_id].emu_type != record["emu_type"]):
            print(f"solution arc {arc_id} does not match this instance",
                  file=sys.stderr)
            return EXIT_ERROR
    svg = render_svg(inst, graph, selected)
    ascii_art = render_ascii(inst, graph, selected)
    outdir = _outdir(args)
    _write(outdir, "diagram.svg", svg)
    _write(outdir, "diagram.txt", ascii_art)
    sys.stdout.write(ascii_art)
    return EXIT_OK


def cmd_export_lp(args) -> int:
    inst = _load(args)
    graph = build_hypergraph(inst)
    model = encode_ilp(graph, inst, driver_weighting=args.driver_weighting)
    text = export_lp(model, name=str(inst.meta.get("name", "rollstock")))
    outdir = _outdir(args)
    if outdir is None:
        sys.stdout.write(text)
    else:
        _write(outdir, "model.lp", text)
    return EXIT_OK


def cmd_export_qubo(args) -> int:
    inst = _load(args)
    graph = build_hypergraph(inst)
    model = encode_ilp(graph, inst, driver_weighting=args.driver_weighting)
    qubo = encode_qubo(model, _lambdas(args))
    ising = to_ising(qubo)
    outdir = _outdir(args)
    if outdir is None:
        sys.stdout.write(export_qubo_coo(qubo))
    else:
        _write(outdir, "qubo.coo", export_qubo_coo(qubo))
        _write(outdir, "ising.coo", export_ising_coo(ising))
    print(f"qubo vars={qubo.num_vars} terms={qubo.num_terms()}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rollstock",
        description="Daily rolling-stock circulation: hypergraph ILP vs "
                    "penalty QUBO with simulated annealing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load and validate an instance")
    _add_instance_opts(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="generate a synthetic instance")
    p.add_argument("output", help="target file, or - for stdout")
    p.add_argument("--trips", type=int, required=True)
    p.add_argument("--couplable", type=int, default=0)
    p.add_argument("--depots", type=int, default=1)
    p.add_argument("--types", type=int, default=1)
    p.add_argument("--delta-min", type=int, default=5)
    p.add_argument("--delta-max", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=_frac_arg, default=None)
    p.add_argument("--no-return-bounds", action="store_true",
                   help="omit depot return bounds (no sink nodes)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve-ilp", help="solve the ILP exactly")
    _add_instance_opts(p)
    _add_out_opt(p)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--emit-lp", action="store_true")
    p.add_argument("--emit-dot", action="store_true")
    p.set_defaults(func=cmd_solve_ilp)

    p = sub.add_parser("solve-qubo",
                       help="anneal the QUBO and post-filter samples")
    _add_instance_opts(p)
    _add_lambda_opts(p)
    _add_out_opt(p)
    p.add_argument("--reads", type=int, default=100)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--beta-min", type=float, default=0.01)
    p.add_argument("--beta-max", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_solve_qubo)

    p = sub.add_parser("enumerate", help="list every feasible plan")
    _add_instance_opts(p)
    _add_out_opt(p)
    p.add_argument("--max-count", type=int, default=100000)
    p.add_argument("--show", type=int, default=10)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("report", help="size/scaling table for instances")
    p.add_argument("instances", nargs="*")
    p.add_argument("--alpha", type=_frac_arg, default=None)
    p.add_argument("--delta-max", type=int, default=None)
    _add_lambda_opts(p)
    p.add_argument("--format", choices=("csv", "md"), default="md")
    _add_out_opt(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("diagram", help="render a plan as SVG + ASCII")
    _add_instance_opts(p)
    p.add_argument("--solution", required=True,
                   help="solution or portfolio JSON from solve-ilp/enumerate")
    _add_out_opt(p)
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("export-lp", help="write the model in LP format")
    _add_instance_opts(p)
    _add_out_opt(p)
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("export-qubo", help="write QUBO/Ising in COO text form")
    _add_instance_opts(p)
    _add_lambda_opts(p)
    _add_out_opt(p)
    p.set_defaults(func=cmd_export_qubo)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("ROLLSTOCK_LOG", "WARNING").upper()
    if level not in ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"):
        level = "WARNING"
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, GeneratorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
