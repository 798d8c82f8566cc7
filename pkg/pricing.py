"""
Dual separation: s-t paths with positive reduced price

    1 - sum_{e in P} y_e - sum_{eta hits P} y_eta

under the duals of an optimal master. Only scenarios with a positive dual take
part. With few priced scenarios every hit configuration is enumerated, each one
a shortest path over the arcs of the permitted scenarios; otherwise a MIP
branching only on the scenario indicators is solved.
"""

import math
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

import console
from config import config
from flows import path_decompose, shortest_path
from lp_kernel import LinearProgram, solve_mip
from network import FlowNetwork, Path, Scenario

BACKENDS = ("auto", "enumerate", "mip")


class PricingIncompleteError(RuntimeError):
    """The pricing MIP stopped early and cannot rule out an improving path."""

    def __init__(self, bound: float):
        self.bound = bound
        super().__init__(f"Pricing MIP stopped early; the best reduced price may reach {bound:.6g}")


class DualPrices:
    """Arc prices y_e and the positive scenario prices y_eta."""

    def __init__(self, arc_prices: Sequence[float], scenario_prices: Mapping[Scenario, float], tol: float = 1e-12):
        self.arc_prices = np.maximum(np.asarray(arc_prices, dtype=float), 0.0)
        merged: Dict[Scenario, float] = {}
        for eta, price in scenario_prices.items():
            if price > tol:
                merged[eta] = merged.get(eta, 0.0) + float(price)
        self.scenarios: List[Tuple[Scenario, float]] = sorted(merged.items())

    @classmethod
    def from_master(cls, solution) -> "DualPrices":
        return cls(solution.arc_duals, solution.scenario_duals)

    @classmethod
    def merge(cls, arc_prices: Sequence[float], class_prices: Iterable[Mapping[Scenario, float]]) -> "DualPrices":
        """One price table for several scenario classes; a path pays every class row it hits."""
        merged: Dict[Scenario, float] = {}
        for prices in class_prices:
            for eta, price in prices.items():
                if price > 0:
                    merged[eta] = merged.get(eta, 0.0) + float(price)
        return cls(arc_prices, merged)

    @classmethod
    def from_hybrid_master(cls, solution) -> "DualPrices":
        return cls.merge(solution.arc_duals, solution.scenario_duals)

    def __len__(self) -> int:
        return len(self.scenarios)

    def reduced_price(self, path: Path) -> float:
        arcs = set(path.arcs)
        paid = float(self.arc_prices[list(path.arcs)].sum())
        paid += sum(price for eta, price in self.scenarios if any(arc in arcs for arc in eta.arcs))
        return 1.0 - paid


def _objective(prices: DualPrices, path: Path, penalty: np.ndarray) -> float:
    return prices.reduced_price(path) - float(penalty[list(path.arcs)].sum())


def _better(candidate: Tuple[float, Path], best: Optional[Tuple[float, Path]]) -> bool:
    if best is None:
        return True
    value, path = candidate
    if value > best[0] + 1e-12:
        return True
    return abs(value - best[0]) <= 1e-12 and path < best[1]


def _price_by_enumeration(net: FlowNetwork, prices: DualPrices, penalty: np.ndarray) -> Optional[Tuple[Path, float]]:
    costs = prices.arc_prices + penalty
    scenario_prices = [price for _, price in prices.scenarios]
    m = len(prices.scenarios)
    # Visit hit sets by increasing paid scenario price so later sets can be cut off.
    masks = sorted(range(1 << m), key=lambda mask: (sum(scenario_prices[i] for i in range(m) if mask >> i & 1), mask))

    best: Optional[Tuple[float, Path]] = None
    seen = set()
    for mask in masks:
        paid = sum(scenario_prices[i] for i in range(m) if mask >> i & 1)
        if best is not None and 1.0 - paid < best[0] - 1e-12:
            break
        forbidden = set()
        for i, (eta, _) in enumerate(prices.scenarios):
            if not mask >> i & 1:
                forbidden.update(eta.arcs)
        key = frozenset(forbidden)
        if key in seen:
            continue
        seen.add(key)
        allowed = [index not in forbidden for index in range(net.arc_count)]
        found = shortest_path(net, costs, allowed)
        if found is None:
            continue
        path, _ = found
        candidate = (_objective(prices, path, penalty), path)
        if _better(candidate, best):
            best = candidate
    if best is None:
        return None
    return best[1], best[0]


def _price_by_mip(
    net: FlowNetwork, prices: DualPrices, penalty: np.ndarray, node_limit: Optional[int] = None
) -> Tuple[Optional[Tuple[Path, float]], Optional[float]]:
    """Best decomposed path, plus a bound on the penalized price when the search stopped early."""
    lp = LinearProgram("max", "pricing")
    costs = prices.arc_prices + penalty
    z_arc = [lp.add_variable(-float(costs[e]), 0.0, 1.0, name=f"ze{e}") for e in range(net.arc_count)]
    z_scenario = [
        lp.add_variable(-price, 0.0, 1.0, integer=True, name=f"zs{i}") for i, (_, price) in enumerate(prices.scenarios)
    ]
    for v in range(net.node_count):
        terms = [(z_arc[e], 1.0) for e in net.out_arcs(v)] + [(z_arc[e], -1.0) for e in net.in_arcs(v)]
        balance = 1.0 if v == net.source else -1.0 if v == net.sink else 0.0
        lp.add_constraint(terms, "==", balance, name=f"flow{v}")
    for i, (eta, _) in enumerate(prices.scenarios):
        for arc in eta.arcs:
            lp.add_constraint([(z_arc[arc], 1.0), (z_scenario[i], -1.0)], "<=", 0.0, name=f"link{i}_{arc}")

    result = solve_mip(lp, branch_set=z_scenario, node_limit=node_limit)
    unproven = None
    if result.status not in ("optimal", "infeasible"):
        console.warn(f"Pricing MIP stopped with status {result.status}")
        unproven = math.inf if result.bound is None else 1.0 + result.bound
    if result.x is None:
        return None, unproven
    arc_flow = np.clip(result.x[: net.arc_count], 0.0, None)
    decomposition = path_decompose(net, arc_flow, tol=1e-7)
    best: Optional[Tuple[float, Path]] = None
    for path in decomposition.paths():
        candidate = (_objective(prices, path, penalty), path)
        if _better(candidate, best):
            best = candidate
    if best is None:
        return None, unproven
    return (best[1], best[0]), unproven


def backend_for(prices: DualPrices, method: str = "auto") -> str:
    if method not in BACKENDS:
        raise ValueError(f"Unknown pricing backend: {method}. Choose from {', '.join(BACKENDS)}")
    if method != "auto":
        return method
    return "enumerate" if len(prices) <= config["PRICING_ENUMERATION_MAX_SCENARIOS"] else "mip"


def best_path(
    net: FlowNetwork,
    prices: DualPrices,
    penalty: Optional[np.ndarray] = None,
    method: str = "auto",
    node_limit: Optional[int] = None,
) -> Optional[Tuple[Path, float]]:
    """Path maximizing the (penalized) reduced price, whatever its sign."""
    return _search(net, prices, penalty, method, node_limit)[0]


def _search(
    net: FlowNetwork,
    prices: DualPrices,
    penalty: Optional[np.ndarray],
    method: str,
    node_limit: Optional[int],
) -> Tuple[Optional[Tuple[Path, float]], Optional[float]]:
    penalty = np.zeros(net.arc_count) if penalty is None else penalty
    if backend_for(prices, method) == "enumerate":
        return _price_by_enumeration(net, prices, penalty), None
    return _price_by_mip(net, prices, penalty, node_limit)


def price_path(
    net: FlowNetwork,
    prices: DualPrices,
    epsilon_penalty: bool = False,
    used_arcs: Iterable[int] = (),
    method: str = "auto",
    epsilon: Optional[float] = None,
    tol: Optional[float] = None,
    node_limit: Optional[int] = None,
) -> Optional[Tuple[Path, float]]:
    """A path with reduced price above tol, or None when none exists.

    With `epsilon_penalty`, arcs in used_arcs cost an extra epsilon first; if
    that finds nothing improving, the unpenalized problem decides. Raises
    PricingIncompleteError when the unpenalized MIP stopped early and its bound
    leaves room for a path above tol.
    """
    epsilon = config["EPSILON_PATH_PENALTY"] if epsilon is None else epsilon
    tol = config["PRICING_TOL"] if tol is None else tol
    used_arcs = sorted(set(used_arcs))

    if epsilon_penalty and used_arcs:
        penalty = np.zeros(net.arc_count)
        penalty[used_arcs] = epsilon
        found = best_path(net, prices, penalty, method, node_limit)
        if found is not None:
            price = prices.reduced_price(found[0])
            if price > tol:
                return found[0], price
        console.debug("Penalized pricing found no improving path, solving unpenalized")

    found, unproven = _search(net, prices, None, method, node_limit)
    if found is not None:
        price = prices.reduced_price(found[0])
        if price > tol:
            return found[0], price
    if unproven is not None and unproven > tol:
        raise PricingIncompleteError(unproven)
    return None


def price_path_hybrid(
    net: FlowNetwork,
    arc_prices: Sequence[float],
    class_prices: Sequence[Mapping[Scenario, float]],
    epsilon_penalty: bool = False,
    used_arcs: Iterable[int] = (),
    method: str = "auto",
) -> Optional[Tuple[Path, float]]:
    """price_path with scenario variables drawn from every class's rows."""
    return price_path(net, DualPrices.merge(arc_prices, class_prices), epsilon_penalty, used_arcs, method)
