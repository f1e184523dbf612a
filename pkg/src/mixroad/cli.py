"""Command line interface.

Subcommands: validate, routes, simulate, optimize, sweep.  Designs are
given as 0/1 strings over candidate pairs ordered lexicographically by
(min id, max id).  Exit codes: 0 success, 2 usage error, 3 invalid
scenario or inputs, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .engine import CompileError, SimulationError, run
from .network import DesignVector, design_cost
from .optimizer import Evaluator, OptimizerError, budget_sweep, exhaustive_search, pso_optimize
from .reporting import (
    format_sweep_table,
    render_design_matrix,
    summary_dict,
    write_summary_json,
    write_sweep_csv,
    write_sweep_json,
    write_trace_csv,
    write_trajectory_csv,
)
from .routes import enumerate_routes
from .scenario import ScenarioError, apply_overrides, load_scenario

__all__ = ["main"]

_EPILOG = """\
design bit strings order candidate pairs lexicographically by
(min id, max id); bit k = 1 builds pair k in both directions.

--params accepts SI-valued overrides (repeatable, k=v):
  mu (1/s)  Ts (s)  c_ij (veh/s)  c_max (veh/s)
  K_jm (veh/m)  K_jr (veh/m)  speed_floor (m/s)  max_route_nodes
"""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixroad",
        description="Mixed subregion/expressway traffic simulation and design search",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(
            name,
            help=help_,
            epilog=_EPILOG,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("scenario", help="scenario file (.scn)")
        p.add_argument(
            "--params",
            metavar="K=V",
            nargs="+",
            action="extend",
            default=[],
            help="calibration overrides, SI values",
        )
        return p

    add("validate", "parse and validate a scenario file")

    p = add("routes", "list legal routes for an od pair under a design")
    p.add_argument("--od", required=True, metavar="A,B", help="origin,destination ids")
    p.add_argument("--design", default=None, help="0/1 bit string (default: nothing built)")

    p = add("simulate", "simulate one design and report metrics")
    p.add_argument("--design", required=True, help="0/1 bit string")
    p.add_argument("--out", metavar="DIR", default=None, help="write summary.json + trajectory.csv")
    p.add_argument("--svg", action="store_true", help="also plot accumulations.svg (needs matplotlib)")

    p = add("optimize", "search the best design under one budget")
    p.add_argument("--budget", required=True, type=float, help="construction budget in $")
    p.add_argument("--seed", required=True, type=int, help="swarm RNG seed")
    p.add_argument(
        "--exhaustive",
        action="store_true",
        help="also run exhaustive search and report both optima",
    )
    p.add_argument("--out", metavar="DIR", default=None, help="write report.json + trace.csv")

    p = add("sweep", "best design per budget, ascending")
    p.add_argument("--budgets", default=None, metavar="LIST", help="comma-separated $ (default: scenario)")
    p.add_argument("--seed", required=True, type=int, help="swarm RNG seed")
    p.add_argument("--method", choices=("pso", "exhaustive"), default="pso")
    p.add_argument("--out", metavar="DIR", default=None, help="write sweep.json + sweep.csv")

    return parser


def _parse_params(tokens: list[str]) -> dict[str, float]:
    out: dict[str, float] = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep or not key:
            raise ScenarioError(f"--params entry {tok!r} is not k=v")
        try:
            out[key] = float(value)
        except ValueError:
            raise ScenarioError(f"--params {key}: bad number {value!r}") from None
    return out


def _load(args):
    scenario = load_scenario(args.scenario)
    overrides = _parse_params(args.params)
    if overrides:
        scenario = apply_overrides(scenario, overrides)
    return scenario


def _outdir(args) -> Path | None:
    if args.out is None:
        return None
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _cmd_validate(args) -> int:
    scenario = _load(args)
    net = scenario.network
    print(
        f"{args.scenario}: OK ({len(net.subregions)} subregions, "
        f"{len(net.candidate_pairs)} candidate pairs, "
        f"{scenario.sim.n_steps} steps of {scenario.sim.step_s:g} s)"
    )
    return 0


def _cmd_routes(args) -> int:
    scenario = _load(args)
    net = scenario.network
    try:
        o_tok, d_tok = args.od.split(",")
        od = (int(o_tok), int(d_tok))
    except ValueError:
        raise ScenarioError(f"--od {args.od!r} is not 'A,B'") from None
    if args.design is None:
        design = DesignVector.empty(net)
    else:
        design = DesignVector.from_bits(net, args.design)
    found = enumerate_routes(net, design, od[0], od[1], scenario.sim.max_route_nodes)
    for route in found:
        print(route)
    print(f"{len(found)} routes for od {od} under design {design.bit_string}")
    return 0


def _cmd_simulate(args) -> int:
    scenario = _load(args)
    design = DesignVector.from_bits(scenario.network, args.design)
    result = run(scenario, design)
    cost = design_cost(scenario.network, design)
    print(f"design {design.bit_string}  cost ${cost:,.0f}")
    print(render_design_matrix(scenario.network, design))
    print(
        f"TTS {result.tts_veh_h:,.1f} veh h | avg accumulation "
        f"{result.avg_accumulation_veh:,.1f} veh | completion "
        f"{result.avg_completion_flow_veh_h:,.1f} veh/h | completed "
        f"{result.total_completed_veh:,.1f} of {result.total_injected_veh:,.1f} veh"
    )
    out = _outdir(args)
    if out is not None:
        write_summary_json(result, out / "summary.json", scenario)
        write_trajectory_csv(result, out / "trajectory.csv")
        if args.svg:
            from .reporting import plot_accumulations_svg

            plot_accumulations_svg(result, out / "accumulations.svg")
        print(f"wrote {out}/summary.json, {out}/trajectory.csv")
    return 0


def _cmd_optimize(args) -> int:
    scenario = _load(args)
    evaluator = Evaluator(scenario)
    pso = pso_optimize(evaluator, args.budget, seed=args.seed)
    design = evaluator.design(pso.best_bits)
    print(f"budget ${args.budget:,.0f}  seed {args.seed}")
    print(render_design_matrix(scenario.network, design))
    print(
        f"pso best {pso.best_bits}  cost ${pso.best_cost:,.0f}  "
        f"TTS {pso.best_tts:,.4f} veh h  ({pso.n_evaluations} evaluations, "
        f"{evaluator.n_simulations} simulations)"
    )
    report = {
        "budget_dollars": args.budget,
        "seed": args.seed,
        "pso": {
            "design_bits": pso.best_bits,
            "cost_dollars": pso.best_cost,
            "tts_veh_h": pso.best_tts,
            "iterations": pso.iterations,
        },
    }
    if args.exhaustive:
        table = exhaustive_search(evaluator, budget=args.budget)
        agree = table.best_bits == pso.best_bits
        print(
            f"exhaustive best {table.best_bits}  cost ${table.best_cost:,.0f}  "
            f"TTS {table.best_tts:,.4f} veh h"
        )
        print("pso matches the exhaustive optimum" if agree else "pso missed the exhaustive optimum")
        report["exhaustive"] = {
            "design_bits": table.best_bits,
            "cost_dollars": table.best_cost,
            "tts_veh_h": table.best_tts,
        }
        report["agreement"] = agree
    out = _outdir(args)
    if out is not None:
        with open(out / "report.json", "w") as f:
            json.dump(report, f, indent=2, sort_keys=True)
            f.write("\n")
        write_trace_csv(pso, out / "trace.csv")
        print(f"wrote {out}/report.json, {out}/trace.csv")
    return 0


def _cmd_sweep(args) -> int:
    scenario = _load(args)
    if args.budgets is not None:
        try:
            budgets = tuple(float(tok) for tok in args.budgets.split(",") if tok.strip())
        except ValueError:
            raise ScenarioError(f"--budgets {args.budgets!r} is not a comma list of numbers") from None
    else:
        budgets = None
    evaluator = Evaluator(scenario)
    sweep = budget_sweep(evaluator, budgets=budgets, seed=args.seed, method=args.method)
    print(format_sweep_table(sweep))
    print(f"{sweep.n_simulations} distinct designs simulated")
    out = _outdir(args)
    if out is not None:
        write_sweep_json(sweep, out / "sweep.json")
        write_sweep_csv(sweep, out / "sweep.csv")
        print(f"wrote {out}/sweep.json, {out}/sweep.csv")
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "routes": _cmd_routes,
    "simulate": _cmd_simulate,
    "optimize": _cmd_optimize,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ScenarioError, CompileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SimulationError, OptimizerError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
