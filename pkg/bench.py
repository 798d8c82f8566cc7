"""
Benchmark runner and reports.

A bench cell is one (family, parameters, k, seed) combination. Each cell runs
the heuristic, the separation driver and the interdiction upper bound, and
returns one summary row plus its per-iteration bound trace and its per-call
pricing log. Cells are independent and run through joblib; the solver inside a
cell is single-threaded.
"""

import itertools
import json
import math
import os
import time
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
import yaml
from joblib import Parallel, delayed
from tqdm import tqdm

import console
import instance_families as families
from config import config
from driver import SolverConfig, solve_robust
from heuristic import solve_heuristic
from interdiction import interdiction_upper_bound
from master import solve_full_model
from network import EnumerationLimitError, FlowNetwork

OUTPUTS = ("table", "csv", "json")
GAP_COLUMNS = ("heuristic_gap", "interdiction_gap")
TIMING_COLUMNS = ("pricing_time_q90", "interdiction_time_q90", "seconds")


def family_names() -> List[str]:
    return sorted(getattr(families, name).name() for name in dir(families) if _is_family(getattr(families, name)))


def _is_family(module) -> bool:
    return callable(getattr(module, "generate", None)) and callable(getattr(module, "name", None))


def family(name: str):
    for module_name in dir(families):
        module = getattr(families, module_name)
        if _is_family(module) and module.name() in (name, name.lower()):
            return module
    raise ValueError(f"Unknown instance family: {name}. Choose from {', '.join(family_names())}")


def make_instance(name: str, params: Optional[Dict] = None, seed: int = 0) -> FlowNetwork:
    return family(name).generate(seed, **(params or {}))


def run_oracle(
    net: FlowNetwork, k: int, path_limit: Optional[int] = None, scenario_limit: Optional[int] = None
) -> float:
    """Optimum of the complete robust LP over all paths and all scenarios."""
    value, _ = solve_full_model(net, k, path_limit, scenario_limit)
    return value


def quantile(values: Sequence[float], q: float = 0.9) -> float:
    if len(values) == 0:
        return 0.0
    return float(pd.Series(values, dtype=float).quantile(q))


def relative_gap(larger: float, smaller: float) -> float:
    if abs(larger) <= config["VALUE_TOL"]:
        return 0.0
    gap = (larger - smaller) / larger
    return 0.0 if abs(gap) <= 1e-12 else gap


def interdiction_gap(upper_bound: float, optimum: float) -> float:
    """(interdiction bound - optimum) / optimum."""
    if math.isnan(upper_bound):
        return math.nan
    if optimum <= config["VALUE_TOL"]:
        return 0.0
    gap = (upper_bound - optimum) / optimum
    return 0.0 if abs(gap) <= 1e-12 else gap


def run_cell(cell: Dict) -> Tuple[Dict, List[Dict], List[Dict]]:
    """Row, bound trace and pricing calls of one bench cell."""
    started = time.perf_counter()
    params = dict(cell.get("params") or {})
    net = make_instance(cell["family"], params, cell.get("seed", 0))
    cfg = SolverConfig(**{"k": cell["k"], **(cell.get("solver") or {})})

    _, heuristic_value = solve_heuristic(net, cfg.k)
    _, value, state = solve_robust(net, cfg)
    try:
        upper_bound = interdiction_upper_bound(net, cfg.k)
    except EnumerationLimitError as e:
        console.warn(f"Interdiction bound skipped: {e}")
        upper_bound = math.nan

    key = {
        "family": cell["family"],
        "params": json.dumps(params, sort_keys=True),
        "k": cfg.k,
        "seed": cell.get("seed", 0),
    }
    row = {
        **key,
        "nodes": net.node_count,
        "arcs": net.arc_count,
        "status": state.status,
        "iterations": state.iteration,
        "paths_active": state.active_paths,
        "paths_generated": len(state.paths),
        "scenarios_active": state.active_scenarios,
        "scenarios_generated": state.scenario_count(),
        "robust_value": value,
        "dual_bound": state.dual_bound,
        "heuristic_value": heuristic_value,
        "interdiction_bound": upper_bound,
        "heuristic_gap": relative_gap(value, heuristic_value),
        "interdiction_gap": interdiction_gap(upper_bound, value),
        "pricing_time_q90": quantile([call["seconds"] for call in state.pricing_calls]),
        "interdiction_time_q90": quantile(state.separation_seconds),
        "seconds": time.perf_counter() - started,
    }
    trace = [{**key, **record} for record in state.records]
    calls = [{**key, **call} for call in state.pricing_calls]
    return row, trace, calls


def expand_cells(entries: Sequence[Dict]) -> List[Dict]:
    """One cell per (entry, k, seed); non-randomized families use seed 0 only."""
    cells = []
    for entry in entries:
        if "family" not in entry:
            raise ValueError(f"Bench entry {entry} has no family")
        helper = family(entry["family"])
        ks = entry.get("k", [1])
        ks = ks if isinstance(ks, list) else [ks]
        seeds = entry.get("seeds", 1)
        seeds = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
        if not helper.randomized():
            seeds = seeds[:1] or [0]
        for k, seed in itertools.product(ks, seeds):
            cells.append(
                {
                    "family": helper.name(),
                    "params": entry.get("params") or {},
                    "k": int(k),
                    "seed": int(seed),
                    "solver": entry.get("solver") or {},
                }
            )
    return cells


def run_bench(cells: Sequence[Dict], jobs: int = 1) -> Tuple[pd.DataFrame, pd.DataFrame, pd.DataFrame]:
    console.info(f"⏳ Running {len(cells)} bench cells with {jobs} job(s)")
    results = Parallel(n_jobs=jobs)(delayed(run_cell)(cell) for cell in tqdm(cells, desc="bench", disable=console.level() < 3))
    rows = pd.DataFrame([row for row, _, _ in results])
    traces = pd.DataFrame([record for _, trace, _ in results for record in trace])
    calls = pd.DataFrame([call for _, _, cell_calls in results for call in cell_calls])
    console.info(f"✅ Finished {len(cells)} bench cells")
    return rows, traces, calls


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """Maximum over seeds of every numeric column, per (family, params, k)."""
    if rows.empty:
        return rows
    keys = ["family", "params", "k"]
    numeric = [c for c in rows.columns if c not in keys + ["seed", "status"] and pd.api.types.is_numeric_dtype(rows[c])]
    summary = rows.groupby(keys, sort=False)[numeric].max().reset_index()
    summary["seeds"] = rows.groupby(keys, sort=False)["seed"].count().values
    summary["converged"] = rows.groupby(keys, sort=False)["status"].apply(lambda s: int((s == "converged").sum())).values
    return summary


def format_gap(value: float, percent: bool = False) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    if abs(value) <= 1e-12:
        return "0"
    if percent:
        return f"{value * 100:.4g}%"
    return f"{value:.4g}"


def report(rows: pd.DataFrame, output: str = "table", percent: bool = False) -> str:
    if output not in OUTPUTS:
        raise ValueError(f"Unknown output format: {output}. Choose from {', '.join(OUTPUTS)}")
    table = rows.copy()
    for column in GAP_COLUMNS:
        if column in table:
            table[column] = [format_gap(v, percent) for v in table[column]]
    if output == "csv":
        return table.to_csv(index=False)
    if output == "json":
        return table.to_json(orient="records", indent=2)
    for column in TIMING_COLUMNS:
        if column in table:
            table[column] = [f"{v:.3g}s" for v in table[column]]
    return table.to_string(index=False)


def write_outputs(directory: str, rows: pd.DataFrame, traces: pd.DataFrame, calls: pd.DataFrame, percent: bool = False):
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "report.csv"), "w") as f:
        f.write(report(summarize(rows), "csv", percent))
    rows.to_csv(os.path.join(directory, "cells.csv"), index=False)
    traces.to_csv(os.path.join(directory, "trace.csv"), index=False)
    calls.to_csv(os.path.join(directory, "pricing_calls.csv"), index=False)
    console.info(f"✅ Bench outputs written to {directory}")


def load_suite(path: Optional[str] = None) -> Dict:
    path = path or config["BENCH_CONFIG_PATH"]
    if not os.path.exists(path):
        raise ValueError(f"Bench suite {path} does not exist")
    with open(path, "r") as f:
        suite = yaml.safe_load(f) or {}
    if not isinstance(suite.get("cells"), list):
        raise ValueError(f"Bench suite {path} needs a 'cells' list")
    return suite


def find_p3_witness(k: int = 1, grid: Optional[Dict] = None, cfg: Optional[SolverConfig] = None) -> Optional[Dict]:
    """First P3 parameter set on the grid where the robust optimum beats the heuristic."""
    helper = family("p3")
    grid = grid or helper.witness_grid()
    cfg = cfg or SolverConfig(k=k)
    names = sorted(grid)
    for values in itertools.product(*(grid[name] for name in names)):
        params = dict(zip(names, values))
        net = helper.generate(0, **params)
        _, heuristic_value = solve_heuristic(net, k)
        _, value, state = solve_robust(net, cfg.model_copy(update={"k": k}))
        if state.converged and value > heuristic_value + config["VALUE_TOL"]:
            console.info(f"✅ P3 witness {params}: robust {value:.6g}, heuristic {heuristic_value:.6g}")
            return {"params": params, "robust_value": value, "heuristic_value": heuristic_value}
    console.warn("No P3 parameter set on the grid separates the heuristic from the optimum")
    return None


def rows_equal(a: pd.DataFrame, b: pd.DataFrame) -> bool:
    """Equality of two bench tables ignoring timing columns."""
    drop = [c for c in TIMING_COLUMNS if c in a.columns]
    left = a.drop(columns=drop).reset_index(drop=True)
    right = b.drop(columns=[c for c in drop if c in b.columns]).reset_index(drop=True)
    return left.astype(str).equals(right.astype(str))
