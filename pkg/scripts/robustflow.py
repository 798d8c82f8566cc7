#!/usr/bin/env python3

"""
Command-line interface of the robust flow solver.

Subcommands: solve, hybrid, heuristic, interdict, oracle, gen, bound, bench.
Results go to stdout as a table, CSV or JSON; progress goes to stderr.

Exit codes: 0 success, 1 internal error, 2 usage or input error,
3 not converged (bounds are still reported), 4 enumeration limit.
"""

import argparse
import json
import os
import sys
from typing import Dict, List, Optional

import pandas as pd

sys.path.append(os.path.join(os.path.dirname(__file__), ".."))
import bench
import console
import seed as seed_helper
from config import config
from driver import SolverConfig, solve_hybrid, solve_robust
from flows import robust_value
from heuristic import approximation_bound, optimal_theta, solve_heuristic, verify_guarantee
from hybrid_stats import PartitionSpec, generalization_terms, observe
from interdiction import PENALTY_SCALES, interdiction_upper_bound, separate_exact
from network import EnumerationLimitError, FlowNetwork, PathFlow
from network_io import FORMATS, format_network, guess_format, read_network, read_observations

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3
EXIT_LIMIT = 4

FAMILY_PARAMS = {
    "M": int,
    "n": int,
    "m": int,
    "m0": int,
    "nodes": int,
    "arcs": int,
    "preset": str,
    "safe_fraction": float,
    "max_capacity": int,
}


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        raise ValueError(message)


def emit(result: Dict, output: str):
    if output == "json":
        print(json.dumps(result, indent=2, default=str))
    elif output == "csv":
        print(pd.DataFrame([result]).to_csv(index=False), end="")
    else:
        width = max((len(key) for key in result), default=0)
        for key, value in result.items():
            if isinstance(value, float):
                value = f"{value:.9g}"
            print(f"{key.ljust(width)}  {value}")


def emit_error(kind: str, message: str, **extra):
    print(json.dumps({"error": kind, "message": message, **extra}))


def flow_listing(x: PathFlow) -> List[Dict]:
    return [{"arcs": list(path.arcs), "rate": rate} for path, rate in x.items()]


def parse_limits(text: Optional[str]) -> Dict:
    if not text:
        return {}
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"--limits expects paths,scenarios,nodes, got '{text}'")
    limits = {}
    for key, part in zip(("path_limit", "scenario_limit", "node_limit"), parts):
        if part.strip():
            try:
                limits[key] = int(part)
            except ValueError as e:
                raise ValueError(f"Invalid limit '{part}' in --limits") from e
    return limits


def parse_floats(text: str, what: str) -> List[float]:
    try:
        return [float(token) for token in text.split(",") if token.strip()]
    except ValueError as e:
        raise ValueError(f"Invalid {what} '{text}': {e}") from e


def solver_config(args) -> SolverConfig:
    options = {"k": getattr(args, "k", 1), **parse_limits(args.limits)}
    if args.tol is not None:
        options["gap_tol"] = args.tol
    if args.max_interdictions_per_iter is not None:
        options["max_interdictions"] = args.max_interdictions_per_iter
    if args.no_path_penalty:
        options["path_penalty"] = False
    if args.no_scenario_penalty:
        options["scenario_penalty"] = False
    options["penalty_scale"] = args.penalty_scale
    options["pricing_method"] = args.pricing
    options["separation_method"] = args.separation
    options["seed"] = args.seed
    return SolverConfig(**options)


def load_network(args) -> FlowNetwork:
    if not args.input:
        raise ValueError("--input is required")
    return read_network(args.input, args.format)


def write_logs(args, state):
    if getattr(args, "trace", None):
        pd.DataFrame(state.records).to_csv(args.trace, index=False)
        console.info(f"✅ Bound trace written to {args.trace}")
    if getattr(args, "pricing_log", None):
        pd.DataFrame(state.pricing_calls).to_csv(args.pricing_log, index=False)
        console.info(f"✅ Pricing calls written to {args.pricing_log}")


def finish(result: Dict, state, args) -> int:
    emit(result, args.output)
    if state.converged:
        return EXIT_OK
    emit_error(
        "not_converged",
        f"Separation stopped with status {state.status}",
        primal_bound=state.primal_bound,
        dual_bound=state.dual_bound,
    )
    return EXIT_NOT_CONVERGED


def cli_solve(args) -> int:
    net = load_network(args)
    x, value, state = solve_robust(net, solver_config(args))
    write_logs(args, state)
    result = {"value": value, **state.summary()}
    if args.show_flow:
        result["flow"] = flow_listing(x)
    return finish(result, state, args)


def observed_weights(args, net: FlowNetwork, spec: PartitionSpec):
    if args.weights and args.observations:
        raise ValueError("Use either --weights or --observations, not both")
    if args.observations:
        return observe(net, spec, read_observations(args.observations))
    if not args.weights:
        raise ValueError("--weights or --observations is required")
    return None


def cli_hybrid(args) -> int:
    net = load_network(args)
    spec = PartitionSpec.parse(args.classes)
    empirical = observed_weights(args, net, spec)
    weights = empirical.q_hat if empirical is not None else parse_floats(args.weights, "weights")
    x, value, state = solve_hybrid(net, spec, weights, solver_config(args))
    write_logs(args, state)
    result = {
        "value": value,
        "classes": [c.name for c in spec.classes(net)],
        "weights": weights,
        **state.summary(),
    }
    if empirical is not None and args.delta is not None:
        result.update(generalization_terms(net, x, spec, empirical, args.delta))
    if args.show_flow:
        result["flow"] = flow_listing(x)
    return finish(result, state, args)


def cli_heuristic(args) -> int:
    net = load_network(args)
    x, value = solve_heuristic(net, args.k)
    result = {
        "value": value,
        "theta": optimal_theta(net, args.k),
        "flow_value": x.total(),
        "max_interdictable_load": x.max_interdictable_load(net),
        "guarantee_holds": verify_guarantee(net, x, args.k),
        "approximation_bound": approximation_bound(args.k) if args.k > 0 else 1.0,
        "paths": len(x),
    }
    if args.show_flow:
        result["flow"] = flow_listing(x)
    emit(result, args.output)
    return EXIT_OK


def cli_interdict(args) -> int:
    net = load_network(args)
    if args.against == "robust":
        x, _, _ = solve_robust(net, solver_config(args))
    else:
        x, _ = solve_heuristic(net, args.k)
    scenario, destroyed = separate_exact(net, x, args.k, method=args.separation)
    result = {
        "against": args.against,
        "flow_value": x.total(),
        "scenario": list(scenario.arcs),
        "destroyed": destroyed,
        "robust_value": robust_value(net, x, args.k),
        "interdiction_bound": interdiction_upper_bound(net, args.k),
    }
    emit(result, args.output)
    return EXIT_OK


def cli_oracle(args) -> int:
    net = load_network(args)
    limits = parse_limits(args.limits)
    value = bench.run_oracle(net, args.k, limits.get("path_limit"), limits.get("scenario_limit"))
    emit({"value": value, "k": args.k}, args.output)
    return EXIT_OK


def family_params(args) -> Dict:
    params = dict(bench.family(args.family).defaults()) if args.family else {}
    for name in FAMILY_PARAMS:
        value = getattr(args, f"param_{name}", None)
        if value is not None:
            params[name] = value
    return params


def cli_gen(args) -> int:
    if not args.family:
        raise ValueError("--family is required")
    seed = seed_helper.generate(args.seed)
    params = family_params(args)
    net = bench.make_instance(args.family, params, seed)
    fmt = args.format or (guess_format(args.out) if args.out else "dimacs")
    text = format_network(net, fmt, comment=f"{args.family} {json.dumps(params, sort_keys=True)} seed {seed}")
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
        console.info(f"✅ Wrote {net.arc_count} arcs to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def cli_bound(args) -> int:
    net = load_network(args)
    if not args.observations:
        raise ValueError("--observations is required")
    spec = PartitionSpec.parse(args.classes)
    empirical = observe(net, spec, read_observations(args.observations))
    x, value, state = solve_hybrid(net, spec, empirical.q_hat, solver_config(args))
    result = {
        "value": value,
        "N": empirical.N,
        "q_hat": empirical.q_hat,
        "delta": args.delta,
        **generalization_terms(net, x, spec, empirical, args.delta),
    }
    return finish(result, state, args)


def cli_bench(args) -> int:
    jobs, percent = args.jobs, args.percent
    if args.suite:
        suite = bench.load_suite(args.suite)
        entries = suite["cells"]
        jobs = jobs or suite.get("jobs", 1)
        percent = percent or bool(suite.get("percent", False))
    elif args.family:
        entry = {"family": args.family, "params": family_params(args), "k": args.k_list, "seeds": args.seeds}
        if args.max_interdictions_per_iter is not None:
            entry["solver"] = {"max_interdictions": args.max_interdictions_per_iter}
        entries = [entry]
    else:
        raise ValueError("bench needs --suite or --family")

    rows, traces, calls = bench.run_bench(bench.expand_cells(entries), jobs or 1)
    if args.output_dir:
        bench.write_outputs(args.output_dir, rows, traces, calls, percent)
    print(bench.report(bench.summarize(rows), args.output, percent), end="" if args.output == "csv" else "\n")
    return EXIT_OK


def add_common(parser: argparse.ArgumentParser, k: bool = True):
    parser.add_argument("--input", help="Network file in extended DIMACS or JSON")
    parser.add_argument("--format", choices=FORMATS, help="Input format (guessed from the extension by default)")
    parser.add_argument("--output", choices=bench.OUTPUTS, default="table", help="Output format")
    parser.add_argument("--seed", type=int, default=None, help="Random seed")
    parser.add_argument("--log", choices=list(console.LEVELS), help="Log verbosity (overrides ROBUSTFLOW_LOG)")
    if k:
        parser.add_argument("--k", type=int, default=1, help="Number of interdicted arcs")


def add_solver(parser: argparse.ArgumentParser):
    parser.add_argument("--tol", type=float, default=None, help="Gap tolerance between primal and dual bound")
    parser.add_argument(
        "--max-interdictions-per-iter",
        type=int,
        default=None,
        help="Maximum number of scenarios generated per iteration",
    )
    parser.add_argument("--limits", help="paths,scenarios,nodes limits, e.g. 10000,10000,1000000")
    parser.add_argument("--pricing", choices=["auto", "enumerate", "mip"], default="auto")
    parser.add_argument("--separation", choices=["auto", "enumerate", "mip"], default="auto")
    parser.add_argument("--no-path-penalty", action="store_true", help="Disable the epsilon path penalty")
    parser.add_argument("--no-scenario-penalty", action="store_true", help="Disable the 1/k scenario perturbation")
    parser.add_argument(
        "--penalty-scale",
        choices=PENALTY_SCALES,
        default="unit",
        help="Scenario penalty per arc: 1/k (unit) or 1/k times the largest arc load (load)",
    )
    parser.add_argument("--trace", help="Write the per-iteration bound trace to this CSV file")
    parser.add_argument("--pricing-log", help="Write the per-call pricing log to this CSV file")
    parser.add_argument("--show-flow", action="store_true", help="Include the path flow in the output")


def add_family(parser: argparse.ArgumentParser):
    parser.add_argument("--family", help=f"Instance family ({', '.join(bench.family_names())})")
    for name, kind in FAMILY_PARAMS.items():
        flag = "--" + name.replace("_", "-")
        parser.add_argument(flag, dest=f"param_{name}", type=kind, default=None, help=f"Family parameter {name}")


def build_parser() -> CliParser:
    parser = CliParser(description="Path-based k-robust maximum flow solver")
    commands = parser.add_subparsers(dest="command", parser_class=CliParser)

    solve = commands.add_parser("solve", help="Optimal k-robust flow by simultaneous separation")
    add_common(solve)
    add_solver(solve)

    hybrid = commands.add_parser("hybrid", help="Optimal flow for a weighted combination of scenario classes")
    add_common(hybrid)
    add_solver(hybrid)
    hybrid.add_argument("--classes", required=True, help="'1,2,3' or 'exposed=4,5;pairs=1:0,0:1'")
    hybrid.add_argument("--weights", help="Class weights summing to 1, e.g. 0.5,0.5")
    hybrid.add_argument("--observations", help="Observed scenarios; their class frequencies become the weights")
    hybrid.add_argument("--delta", type=float, default=None, help="Confidence level of the generalization bound")

    heuristic = commands.add_parser("heuristic", help="Parametric max-flow heuristic")
    add_common(heuristic)
    heuristic.add_argument("--show-flow", action="store_true", help="Include the path flow in the output")

    interdict = commands.add_parser("interdict", help="Most destructive scenario and the interdiction bound")
    add_common(interdict)
    add_solver(interdict)
    interdict.add_argument("--against", choices=["heuristic", "robust"], default="heuristic")

    oracle = commands.add_parser("oracle", help="Complete robust LP over all paths and scenarios")
    add_common(oracle)
    oracle.add_argument("--limits", help="paths,scenarios,nodes limits")

    gen = commands.add_parser("gen", help="Generate an instance")
    add_common(gen, k=False)
    add_family(gen)
    gen.add_argument("--out", help="Write to this file instead of stdout")

    bound = commands.add_parser("bound", help="Generalization bound of the hybrid solution")
    add_common(bound)
    add_solver(bound)
    bound.add_argument("--classes", required=True, help="'1,2,3' or 'exposed=4,5;pairs=1:0,0:1'")
    bound.add_argument("--observations", help="Observed scenarios")
    bound.add_argument("--delta", type=float, default=0.05, help="Confidence level")

    bench_parser = commands.add_parser("bench", help="Run bench cells and report")
    add_common(bench_parser, k=False)
    add_family(bench_parser)
    bench_parser.add_argument("--k", dest="k_list", type=int, nargs="+", default=[1], help="Values of k")
    bench_parser.add_argument("--seeds", type=int, default=1, help="Number of seeds per cell")
    bench_parser.add_argument("--suite", help=f"YAML bench suite, e.g. {config['BENCH_CONFIG_PATH']}")
    bench_parser.add_argument("--jobs", type=int, default=None, help="Concurrent cells")
    bench_parser.add_argument("--percent", action="store_true", help="Report gaps in percent")
    bench_parser.add_argument("--output-dir", help="Write report, cells, trace and pricing CSV files here")
    bench_parser.add_argument(
        "--max-interdictions-per-iter", type=int, default=None, help="Maximum scenarios generated per iteration"
    )
    return parser


COMMANDS = {
    "solve": cli_solve,
    "hybrid": cli_hybrid,
    "heuristic": cli_heuristic,
    "interdict": cli_interdict,
    "oracle": cli_oracle,
    "gen": cli_gen,
    "bound": cli_bound,
    "bench": cli_bench,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ValueError(f"A subcommand is required: {', '.join(COMMANDS)}")
        if args.log:
            console.set_level(args.log)
        return COMMANDS[args.command](args)
    except EnumerationLimitError as e:
        emit_error("enumeration_limit", str(e), limit=e.limit, count=e.count)
        return EXIT_LIMIT
    except (ValueError, OSError) as e:
        emit_error("usage", str(e))
        return EXIT_USAGE
    except Exception as e:
        console.error(f"Internal error: {e}")
        emit_error("internal", str(e))
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
