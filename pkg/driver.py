"""
Simultaneous separation.

Each outer iteration prices paths into the master until none has a positive
reduced price, which makes the master objective a dual bound f^d, then runs
exact interdiction on the master flow, whose robust value is a primal bound f^p,
and adds violated scenarios. The loop stops once f^d - f^p <= gap_tol.
"""

import time
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, field_validator

import console
from config import config
from heuristic import solve_heuristic
from interdiction import PENALTY_SCALES, generate_scenarios, most_destructive, robust_pools, separate_pools
from master import check_weights, solve_hybrid_master, solve_restricted_master
from network import FlowNetwork, Path, PathFlow, Scenario
from pricing import BACKENDS, DualPrices, PricingIncompleteError, backend_for, price_path

STATUSES = ("converged", "iteration_limit", "stalled")


class SolverConfig(BaseModel):
    k: int = Field(default=1, ge=0)
    gap_tol: float = Field(default_factory=lambda: config["GAP_TOL"], gt=0)
    max_interdictions: Optional[int] = Field(default=None, ge=1)
    path_penalty: bool = True
    scenario_penalty: bool = True
    penalty_scale: str = "unit"
    epsilon: float = Field(default_factory=lambda: config["EPSILON_PATH_PENALTY"], gt=0)
    pricing_tol: float = Field(default_factory=lambda: config["PRICING_TOL"], gt=0)
    node_limit: int = Field(default_factory=lambda: config["NODE_LIMIT"], ge=1)
    path_limit: int = Field(default_factory=lambda: config["PATH_LIMIT"], ge=1)
    scenario_limit: int = Field(default_factory=lambda: config["SCENARIO_ENUMERATION_LIMIT"], ge=1)
    max_iterations: int = Field(default_factory=lambda: config["MAX_ITERATIONS"], ge=1)
    stall_iterations: int = Field(default_factory=lambda: config["STALL_ITERATIONS"], ge=1)
    pricing_method: str = "auto"
    separation_method: str = "auto"
    seed: Optional[int] = None

    @field_validator("pricing_method")
    @classmethod
    def known_pricing(cls, value: str) -> str:
        if value not in BACKENDS:
            raise ValueError(f"Unknown pricing backend: {value}. Choose from {', '.join(BACKENDS)}")
        return value

    @field_validator("penalty_scale")
    @classmethod
    def known_scale(cls, value: str) -> str:
        if value not in PENALTY_SCALES:
            raise ValueError(f"Unknown penalty scale: {value}. Choose from {', '.join(PENALTY_SCALES)}")
        return value

    @field_validator("separation_method")
    @classmethod
    def known_separation(cls, value: str) -> str:
        if value not in ("auto", "enumerate", "mip"):
            raise ValueError(f"Unknown separation method: {value}. Choose from auto, enumerate, mip")
        return value


class SeparationState:
    """Working sets, bounds and the per-iteration log of one separation run."""

    def __init__(self, classes: int = 1):
        self.paths: List[Path] = []
        self.scenarios: List[List[Scenario]] = [[] for _ in range(classes)]
        self.master = None
        self.primal_bound = float("-inf")
        self.dual_bound = float("inf")
        self.best_flow = PathFlow()
        self.heuristic_value = 0.0
        self.iteration = 0
        self.status = "iteration_limit"
        self.records: List[Dict] = []
        self.pricing_calls: List[Dict] = []
        self.separation_calls = 0
        self.separation_seconds: List[float] = []
        self.master_solves = 0
        self.active_paths = 0
        self.active_scenarios = 0
        self.seconds = 0.0

    @property
    def gap(self) -> float:
        return self.dual_bound - self.primal_bound

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def scenario_count(self) -> int:
        return sum(len(scenarios) for scenarios in self.scenarios)

    def summary(self) -> Dict:
        return {
            "status": self.status,
            "primal_bound": self.primal_bound,
            "dual_bound": self.dual_bound,
            "gap": self.gap,
            "iterations": self.iteration,
            "paths_generated": len(self.paths),
            "paths_active": self.active_paths,
            "scenarios_generated": self.scenario_count(),
            "scenarios_active": self.active_scenarios,
            "pricing_calls": len(self.pricing_calls),
            "separation_calls": self.separation_calls,
            "heuristic_value": self.heuristic_value,
            "seconds": self.seconds,
        }


def stall_count(stalled: int, added: int, moved: bool) -> int:
    """Consecutive iterations that neither added a row or column nor moved a bound."""
    return 0 if added or moved else stalled + 1


def _solve_master(net: FlowNetwork, state: SeparationState, weights: Sequence[float]):
    state.master_solves += 1
    if len(weights) == 1:
        master = solve_restricted_master(net, state.paths, state.scenarios[0])
        return master, master.x, [master.lam], DualPrices.from_master(master)
    master = solve_hybrid_master(net, state.paths, state.scenarios, weights)
    return master, master.x, master.lambdas, DualPrices.from_hybrid_master(master)


def _separate(
    net: FlowNetwork,
    cfg: SolverConfig,
    class_pools: Sequence,
    weights: Sequence[float],
    initial: PathFlow,
    initial_value: float,
) -> SeparationState:
    started = time.perf_counter()
    state = SeparationState(len(class_pools))
    state.paths = initial.paths()
    state.primal_bound = initial_value
    state.best_flow = initial
    state.heuristic_value = initial_value
    value_tol = config["VALUE_TOL"]
    stalled = 0

    while state.iteration < cfg.max_iterations:
        state.iteration += 1
        iteration_started = time.perf_counter()
        calls_before = len(state.pricing_calls)
        separations_before = state.separation_calls
        paths_before = len(state.paths)
        known = set(state.paths)

        priced_out = False
        while True:
            master, x, lambdas, prices = _solve_master(net, state, weights)
            used = {arc for path in state.paths for arc in path.arcs}
            call_started = time.perf_counter()
            try:
                found = price_path(
                    net,
                    prices,
                    cfg.path_penalty,
                    used,
                    cfg.pricing_method,
                    cfg.epsilon,
                    cfg.pricing_tol,
                    cfg.node_limit,
                )
                priced_out = found is None
            except PricingIncompleteError as e:
                console.warn(f"{e}; keeping the previous dual bound")
                found = None
            state.pricing_calls.append(
                {
                    "iteration": state.iteration,
                    "call": len(state.pricing_calls) + 1,
                    "priced_scenarios": len(prices),
                    "backend": backend_for(prices, cfg.pricing_method),
                    "improving": found is not None,
                    "reduced_price": found[1] if found else 0.0,
                    "seconds": time.perf_counter() - call_started,
                }
            )
            if found is None:
                break
            if found[0] in known:
                console.warn(f"Pricing returned path {list(found[0].arcs)} that is already in the master")
                break
            state.paths.append(found[0])
            known.add(found[0])
            if len(state.paths) >= cfg.path_limit:
                console.warn(f"Path limit {cfg.path_limit} reached")
                break

        state.master = master
        previous_primal, previous_dual = state.primal_bound, state.dual_bound
        # Only a master that pricing could not improve bounds the optimum from above.
        if priced_out:
            state.dual_bound = min(state.dual_bound, master.objective)

        destroyed_total = 0.0
        new_rows = 0
        for index, (pools, q) in enumerate(zip(class_pools, weights)):
            if q <= 0:
                continue
            separation_started = time.perf_counter()
            scenario, destroyed, worst = most_destructive(net, x, pools, cfg.separation_method, cfg.node_limit)
            state.separation_calls += 1
            # An unproven separation only caps the destroyed flow from above.
            destroyed_total += q * worst
            if destroyed <= lambdas[index] + value_tol:
                state.separation_seconds.append(time.perf_counter() - separation_started)
                continue
            batch = [(scenario, destroyed)]
            if scenario in state.scenarios[index]:
                batch = []
            if cfg.max_interdictions is None or cfg.max_interdictions > 1:
                more = generate_scenarios(
                    net,
                    x,
                    pools,
                    lambdas[index],
                    None if cfg.max_interdictions is None else cfg.max_interdictions - len(batch),
                    cfg.scenario_penalty,
                    state.scenarios[index] + [eta for eta, _ in batch],
                    cfg.separation_method,
                    cfg.node_limit,
                    cfg.penalty_scale,
                )
                state.separation_calls += len(more) + 1
                batch.extend(more)
            state.scenarios[index].extend(eta for eta, _ in batch)
            state.separation_seconds.append(time.perf_counter() - separation_started)
            new_rows += len(batch)

        robust = x.total() - destroyed_total
        if robust > state.primal_bound:
            state.primal_bound = robust
            state.best_flow = x

        state.active_paths, state.active_scenarios = len(x), len(prices)
        record = {
            "iteration": state.iteration,
            "primal_bound": state.primal_bound,
            "dual_bound": state.dual_bound,
            "gap": state.gap,
            "paths_generated": len(state.paths),
            "paths_added": len(state.paths) - paths_before,
            "paths_active": state.active_paths,
            "scenarios_generated": state.scenario_count(),
            "scenarios_added": new_rows,
            "scenarios_active": state.active_scenarios,
            "pricing_calls": len(state.pricing_calls) - calls_before,
            "separation_calls": state.separation_calls - separations_before,
            "seconds": time.perf_counter() - iteration_started,
        }
        state.records.append(record)
        console.info(
            f"⏳ Iteration {state.iteration}: primal {state.primal_bound:.9g}, dual {state.dual_bound:.9g}, "
            f"paths {len(state.paths)}, scenarios {state.scenario_count()}"
        )

        if state.gap <= cfg.gap_tol:
            state.status = "converged"
            break
        if len(state.paths) >= cfg.path_limit or state.scenario_count() >= cfg.scenario_limit:
            console.warn("Column or row limit reached before convergence")
            state.status = "iteration_limit"
            break
        added = new_rows + len(state.paths) - paths_before
        moved = state.primal_bound > previous_primal + 1e-12 or state.dual_bound < previous_dual - 1e-12
        if not added and not moved:
            console.warn("No new path or violated scenario although the bounds differ")
        stalled = stall_count(stalled, added, moved)
        if stalled >= cfg.stall_iterations:
            state.status = "stalled"
            break

    state.seconds = time.perf_counter() - started
    if state.converged:
        console.info(f"✅ Converged after {state.iteration} iterations, value {state.primal_bound:.9g}")
    else:
        console.warn(
            f"Stopped with status {state.status} after {state.iteration} iterations, "
            f"bounds [{state.primal_bound:.9g}, {state.dual_bound:.9g}]"
        )
    return state


def solve_robust(net: FlowNetwork, cfg: SolverConfig) -> Tuple[PathFlow, float, SeparationState]:
    """Optimal k-robust path flow, its robust value and the separation log."""
    x, value = solve_heuristic(net, cfg.k)
    console.info(f"⏳ Heuristic value {value:.9g} on {len(x)} paths")
    state = _separate(net, cfg, [robust_pools(net, cfg.k)], [1.0], x, value)
    return state.best_flow, state.primal_bound, state


def hybrid_value(net: FlowNetwork, x: PathFlow, classes, weights: Sequence[float], method: str = "auto") -> float:
    """sum_k q_k * (|x| - worst destroyed flow over class k)."""
    total = x.total()
    value = 0.0
    for scenario_class, q in zip(classes, weights):
        if q <= 0:
            continue
        _, destroyed = separate_pools(net, x, scenario_class.pools, method=method)
        value += q * (total - destroyed)
    return value


def solve_hybrid(
    net: FlowNetwork, spec, weights: Sequence[float], cfg: SolverConfig
) -> Tuple[PathFlow, float, SeparationState]:
    """Optimal path flow for sum_k q_k min over class k, with its value and log."""
    classes = spec.classes(net)
    weights = check_weights(weights, len(classes))
    x, _ = solve_heuristic(net, max(spec.largest(), 1))
    value = hybrid_value(net, x, classes, weights, cfg.separation_method)
    console.info(f"⏳ Heuristic start value {value:.9g} over {len(classes)} classes")
    state = _separate(net, cfg, [c.pools for c in classes], weights, x, value)
    return state.best_flow, state.primal_bound, state
