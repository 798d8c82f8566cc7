"""
Master linear programs over path columns and scenario rows.

All masters share one shape: maximize sum_P x_P - sum_k q_k * lambda_k subject to
arc capacities and one row per generated scenario of class k,
    sum_{P hits eta} x_P - lambda_k <= 0.
The robust master is the single-class case with q = (1).
"""

import itertools
import math
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import comb

from config import config
from flows import enumerate_simple_paths
from lp_kernel import LinearProgram, solve_lp
from network import EnumerationLimitError, FlowNetwork, Path, PathFlow, Scenario


class MasterSolution(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    paths: List[Path]
    x: PathFlow
    lam: float
    objective: float
    arc_duals: np.ndarray
    scenario_duals: Dict[Scenario, float] = Field(default_factory=dict)
    iterations: int = 0


class HybridMasterSolution(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    paths: List[Path]
    x: PathFlow
    lambdas: List[float]
    weights: List[float]
    objective: float
    arc_duals: np.ndarray
    scenario_duals: List[Dict[Scenario, float]] = Field(default_factory=list)
    iterations: int = 0


def check_weights(weights: Sequence[float], classes: int) -> List[float]:
    weights = [float(q) for q in weights]
    if len(weights) != classes:
        raise ValueError(f"Expected {classes} class weights, got {len(weights)}")
    for index, q in enumerate(weights):
        if not math.isfinite(q) or q < 0:
            raise ValueError(f"Class weight {index} must be a nonnegative number, got {q}")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError(f"Class weights must sum to 1, got {sum(weights):.12g}")
    return weights


def _dedup(items):
    return list(dict.fromkeys(items))


def _master_lp(
    net: FlowNetwork,
    paths: Sequence[Path],
    classes: Sequence[Sequence[Scenario]],
    weights: Sequence[float],
    name: str,
):
    lp = LinearProgram("max", name)
    for i in range(len(paths)):
        lp.add_variable(1.0, name=f"x{i}")
    lambda_cap = float(net.capacities().sum())
    lambdas = [
        lp.add_variable(-q, 0.0, lambda_cap, name=f"lambda{k}") for k, q in enumerate(weights)
    ]

    users = defaultdict(list)
    for i, path in enumerate(paths):
        for arc in path.arcs:
            users[arc].append(i)

    capacities = net.capacities()
    arc_rows = {}
    for arc in sorted(users):
        arc_rows[arc] = lp.add_constraint(
            [(i, 1.0) for i in users[arc]], "<=", float(capacities[arc]), name=f"cap{arc}"
        )

    scenario_rows = []
    for k, scenarios in enumerate(classes):
        rows = {}
        for eta in scenarios:
            hit = sorted(set(i for arc in eta.arcs for i in users.get(arc, ())))
            coefficients = [(i, 1.0) for i in hit] + [(lambdas[k], -1.0)]
            rows[eta] = lp.add_constraint(coefficients, "<=", 0.0, name=f"scen{k}_{len(rows)}")
        scenario_rows.append(rows)
    return lp, lambdas, arc_rows, scenario_rows


def _solve_master(net, paths, classes, weights, name):
    for path in paths:
        net.check_path(path)
    for scenarios in classes:
        for eta in scenarios:
            net.check_scenario(eta)

    lp, lambdas, arc_rows, scenario_rows = _master_lp(net, paths, classes, weights, name)
    result = solve_lp(lp)
    if not result.optimal:
        raise RuntimeError(f"Master LP {name} ended with status {result.status}")

    x = PathFlow(
        {path: result.x[i] for i, path in enumerate(paths)}, tol=config["FEASIBILITY_TOL"]
    )
    arc_duals = np.zeros(net.arc_count)
    for arc, row in arc_rows.items():
        arc_duals[arc] = max(result.duals[row], 0.0)
    scenario_duals = [
        {eta: max(result.duals[row], 0.0) for eta, row in rows.items()} for rows in scenario_rows
    ]
    lambda_values = [float(result.x[col]) for col in lambdas]
    return x, lambda_values, float(result.objective), arc_duals, scenario_duals, result.iterations


def solve_restricted_master(
    net: FlowNetwork, paths: Sequence[Path], scenarios: Sequence[Scenario]
) -> MasterSolution:
    paths = _dedup(paths)
    scenarios = _dedup(scenarios)
    if not paths:
        return MasterSolution(
            paths=[],
            x=PathFlow(),
            lam=0.0,
            objective=0.0,
            arc_duals=np.zeros(net.arc_count),
            scenario_duals={eta: 0.0 for eta in scenarios},
        )
    x, lambdas, objective, arc_duals, scenario_duals, iterations = _solve_master(
        net, paths, [scenarios], [1.0], "restricted_master"
    )
    return MasterSolution(
        paths=paths,
        x=x,
        lam=lambdas[0],
        objective=objective,
        arc_duals=arc_duals,
        scenario_duals=scenario_duals[0],
        iterations=iterations,
    )


def solve_hybrid_master(
    net: FlowNetwork,
    paths: Sequence[Path],
    class_scenarios: Sequence[Sequence[Scenario]],
    weights: Sequence[float],
) -> HybridMasterSolution:
    weights = check_weights(weights, len(class_scenarios))
    paths = _dedup(paths)
    classes = [_dedup(scenarios) for scenarios in class_scenarios]
    if not paths:
        return HybridMasterSolution(
            paths=[],
            x=PathFlow(),
            lambdas=[0.0] * len(classes),
            weights=weights,
            objective=0.0,
            arc_duals=np.zeros(net.arc_count),
            scenario_duals=[{eta: 0.0 for eta in scenarios} for scenarios in classes],
        )
    x, lambdas, objective, arc_duals, scenario_duals, iterations = _solve_master(
        net, paths, classes, weights, "hybrid_master"
    )
    return HybridMasterSolution(
        paths=paths,
        x=x,
        lambdas=lambdas,
        weights=weights,
        objective=objective,
        arc_duals=arc_duals,
        scenario_duals=scenario_duals,
        iterations=iterations,
    )


def all_scenarios(net: FlowNetwork, k: int, limit: Optional[int] = None) -> List[Scenario]:
    """Every scenario of exactly min(k, #interdictable) interdictable arcs."""
    limit = config["SCENARIO_ENUMERATION_LIMIT"] if limit is None else limit
    interdictable = net.interdictable_arcs()
    size = max(0, min(k, len(interdictable)))
    count = int(comb(len(interdictable), size, exact=True))
    if count > limit:
        raise EnumerationLimitError("scenarios", limit, count)
    return [Scenario.of(arcs) for arcs in itertools.combinations(interdictable, size)]


def build_full_model(
    net: FlowNetwork,
    k: int,
    path_limit: Optional[int] = None,
    scenario_limit: Optional[int] = None,
) -> Tuple[LinearProgram, List[Path], List[Scenario]]:
    """The complete robust LP over every simple path and every scenario."""
    paths = enumerate_simple_paths(net, path_limit)
    scenarios = all_scenarios(net, k, scenario_limit)
    lp, _, _, _ = _master_lp(net, paths, [scenarios], [1.0], "full_model")
    return lp, paths, scenarios


def build_full_hybrid_model(
    net: FlowNetwork,
    class_scenarios: Sequence[Sequence[Scenario]],
    weights: Sequence[float],
    path_limit: Optional[int] = None,
) -> Tuple[LinearProgram, List[Path]]:
    weights = check_weights(weights, len(class_scenarios))
    paths = enumerate_simple_paths(net, path_limit)
    lp, _, _, _ = _master_lp(net, paths, class_scenarios, weights, "full_hybrid_model")
    return lp, paths


def solve_full_model(
    net: FlowNetwork, k: int, path_limit: Optional[int] = None, scenario_limit: Optional[int] = None
) -> Tuple[float, PathFlow]:
    """Oracle value and flow of the complete robust LP."""
    lp, paths, _ = build_full_model(net, k, path_limit, scenario_limit)
    if not paths:
        return 0.0, PathFlow()
    result = solve_lp(lp)
    if not result.optimal:
        raise RuntimeError(f"Full model ended with status {result.status}")
    x = PathFlow({path: result.x[i] for i, path in enumerate(paths)}, tol=config["FEASIBILITY_TOL"])
    return float(result.objective), x
