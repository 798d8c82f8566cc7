"""
Primal separation: scenarios that destroy the most flow of a fixed path flow.

A scenario is described by pools, a list of (arc pool, count) pairs; the robust
case is the single pool of all interdictable arcs with count k, two-tier hybrid
classes use two disjoint pools. Only arcs loaded by x can change the objective,
so the search runs over loaded arcs and pads each pool with its lowest unused
arcs afterwards.
"""

import itertools
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

import console
from config import config
from flows import destroyed, incidence, max_destroyed_by_enumeration, max_flow, pad_scenario
from lp_kernel import LinearProgram, solve_lp, solve_mip
from network import EnumerationLimitError, FlowNetwork, PathFlow, Scenario

Pools = Sequence[Tuple[Sequence[int], int]]
PENALTY_SCALES = ("unit", "load")


def robust_pools(net: FlowNetwork, k: int) -> List[Tuple[Tuple[int, ...], int]]:
    interdictable = net.interdictable_arcs()
    return [(interdictable, min(max(k, 0), len(interdictable)))]


def _check_pools(net: FlowNetwork, pools: Pools):
    seen = set()
    for pool, count in pools:
        if count < 0 or count > len(pool):
            raise ValueError(f"Pool of {len(pool)} arcs cannot supply {count} interdictions")
        for arc in pool:
            net.check_arc(arc)
            if net.arcs[arc].safe:
                raise ValueError(f"Pool contains safe arc {arc}")
            if arc in seen:
                raise ValueError(f"Arc {arc} appears in more than one pool")
            seen.add(arc)


def _loaded_pools(x: PathFlow, pools: Pools):
    used = {arc for path in x.rates for arc in path.arcs}
    return [([arc for arc in pool if arc in used], count) for pool, count in pools]


def scenario_count(x: PathFlow, pools: Pools) -> int:
    """Number of loaded-arc choices the enumeration backend would visit."""
    total = 1
    for loaded, count in _loaded_pools(x, pools):
        total *= int(comb(len(loaded), min(count, len(loaded)), exact=True))
    return total


def _solve_coverage_mip(
    net: FlowNetwork, x: PathFlow, pools: Pools, penalty: Dict[int, float], node_limit: Optional[int] = None
) -> Tuple[Tuple[int, ...], Optional[float]]:
    """Chosen loaded arcs, plus the search bound on the objective when optimality was not proven."""
    # max sum_P x_P w_P - sum_e pen_e z_e,  w_P <= sum_{e in P} z_e,  sum_{pool} z_e = take
    loaded_pools = _loaded_pools(x, pools)
    arcs = sorted(arc for loaded, _ in loaded_pools for arc in loaded)
    rates, matrix = incidence(x, arcs)

    lp = LinearProgram("max", "interdiction")
    z = [lp.add_variable(-penalty.get(arc, 0.0), 0.0, 1.0, integer=True, name=f"z{arc}") for arc in arcs]
    w = [lp.add_variable(float(rate), 0.0, 1.0, name=f"w{i}") for i, rate in enumerate(rates)]
    for i in range(len(w)):
        covering = [(z[j], -1.0) for j in np.flatnonzero(matrix[i])]
        lp.add_constraint([(w[i], 1.0)] + covering, "<=", 0.0, name=f"cover{i}")
    column = {arc: j for j, arc in enumerate(arcs)}
    for index, (loaded, count) in enumerate(loaded_pools):
        if loaded:
            lp.add_constraint(
                [(z[column[arc]], 1.0) for arc in loaded], "==", min(count, len(loaded)), name=f"pool{index}"
            )

    greedy = _greedy_choice(net, x, pools, penalty)
    start = np.zeros(lp.num_cols)
    for arc in greedy:
        start[z[column[arc]]] = 1.0
    hit = matrix[:, [column[arc] for arc in greedy]].any(axis=1) if greedy else np.zeros(len(w), dtype=bool)
    start[len(z):] = hit.astype(float)

    result = solve_mip(lp, branch_set=z, node_limit=node_limit, incumbent=start)
    if result.x is None:
        raise RuntimeError(f"Interdiction MIP ended with status {result.status}")
    chosen = tuple(arc for arc in arcs if result.x[z[column[arc]]] > 0.5)
    if result.optimal:
        return chosen, None
    console.warn(f"Interdiction MIP stopped with status {result.status}, gap {result.gap:.3g}")
    return chosen, result.bound


def _best_choice(
    net: FlowNetwork,
    x: PathFlow,
    pools: Pools,
    penalty: Dict[int, float],
    method: str,
    node_limit: Optional[int] = None,
) -> Tuple[Scenario, Optional[float]]:
    if method not in ("auto", "enumerate", "mip"):
        raise ValueError(f"Unknown separation method: {method}. Choose from auto, enumerate, mip")
    limit = config["INTERDICTION_ENUMERATION_LIMIT"]
    if method == "enumerate" or (method == "auto" and scenario_count(x, pools) <= limit):
        chosen, _ = max_destroyed_by_enumeration(net, x, pools, math.inf if method == "enumerate" else limit, penalty)
        return pad_scenario(pools, chosen), None
    chosen, bound = _solve_coverage_mip(net, x, pools, penalty, node_limit)
    return pad_scenario(pools, chosen), bound


def _penalty(net: FlowNetwork, x: PathFlow, pools: Pools, previous: Sequence[Scenario], scale: str) -> Dict[int, float]:
    if scale not in PENALTY_SCALES:
        raise ValueError(f"Unknown penalty scale: {scale}. Choose from {', '.join(PENALTY_SCALES)}")
    k = sum(count for _, count in pools)
    if not k:
        return {}
    unit = 1.0 / k
    if scale == "load":
        loads = x.arc_loads(net)
        unit *= max((float(loads[arc]) for pool, _ in pools for arc in pool), default=0.0)
    penalized = {arc for eta in previous for arc in eta.arcs}
    return {arc: unit for arc in penalized}


def separate_pools(
    net: FlowNetwork,
    x: PathFlow,
    pools: Pools,
    perturb: bool = False,
    previous: Sequence[Scenario] = (),
    threshold: Optional[float] = None,
    method: str = "auto",
    node_limit: Optional[int] = None,
    penalty_scale: str = "unit",
) -> Tuple[Scenario, float]:
    """Most destructive scenario drawn from the pools, with its destroyed flow.

    With `perturb`, each arc of any previous scenario costs 1/k, times the largest
    pool arc load of x when penalty_scale is "load". If the perturbed
    optimum does not destroy more than `threshold` (default 0), the unperturbed
    problem is solved instead. The reported value is always unperturbed.
    """
    _check_pools(net, pools)
    threshold = 0.0 if threshold is None else threshold
    if not x.rates:
        scenario = pad_scenario(pools, ())
        return scenario, 0.0

    if perturb and previous:
        penalty = _penalty(net, x, pools, previous, penalty_scale)
        scenario, _ = _best_choice(net, x, pools, penalty, method, node_limit)
        value = destroyed(net, x, scenario)
        if value > threshold + config["VALUE_TOL"]:
            return scenario, value
        console.debug("Perturbed separation found no violated scenario, solving unperturbed")

    scenario, value, _ = most_destructive(net, x, pools, method, node_limit)
    return scenario, value


def most_destructive(
    net: FlowNetwork, x: PathFlow, pools: Pools, method: str = "auto", node_limit: Optional[int] = None
) -> Tuple[Scenario, float, float]:
    """Unperturbed separation: scenario, destroyed flow, and an upper bound on the
    largest destroyed flow. The two values agree unless the coverage MIP stopped early.
    """
    _check_pools(net, pools)
    if not x.rates:
        return pad_scenario(pools, ()), 0.0, 0.0
    scenario, bound = _best_choice(net, x, pools, {}, method, node_limit)
    value = destroyed(net, x, scenario)
    return scenario, value, value if bound is None else max(value, bound)


def separate_exact(
    net: FlowNetwork,
    x: PathFlow,
    k: int,
    perturb: bool = False,
    previous: Sequence[Scenario] = (),
    threshold: Optional[float] = None,
    method: str = "auto",
) -> Tuple[Scenario, float]:
    """Scenario of exactly k interdictable arcs maximizing destroyed flow.

    k at or above the number of interdictable arcs gives the all-interdictable scenario.
    """
    interdictable = net.interdictable_arcs()
    if k >= len(interdictable):
        scenario = Scenario.of(interdictable)
        return scenario, destroyed(net, x, scenario)
    return separate_pools(net, x, robust_pools(net, k), perturb, previous, threshold, method)


def separate_class(
    net: FlowNetwork,
    x: PathFlow,
    scenario_class,
    perturb: bool = False,
    previous: Sequence[Scenario] = (),
    threshold: Optional[float] = None,
    method: str = "auto",
) -> Tuple[Scenario, float]:
    """separate_pools over the pools of a hybrid scenario class."""
    return separate_pools(net, x, scenario_class.pools, perturb, previous, threshold, method)


def generate_scenarios(
    net: FlowNetwork,
    x: PathFlow,
    pools: Pools,
    threshold: float,
    limit: Optional[int] = None,
    perturb: bool = True,
    existing: Sequence[Scenario] = (),
    method: str = "auto",
    node_limit: Optional[int] = None,
    penalty_scale: str = "unit",
) -> List[Tuple[Scenario, float]]:
    """Up to `limit` distinct scenarios destroying more than `threshold`.

    After each find the search is repeated with the found scenarios penalized
    (when `perturb` is set) and stops at the first repeat or non-violated result.
    """
    found: List[Tuple[Scenario, float]] = []
    known = set(existing)
    tol = config["VALUE_TOL"]
    while limit is None or len(found) < limit:
        previous = list(existing) + [eta for eta, _ in found]
        scenario, value = separate_pools(
            net, x, pools, perturb, previous, threshold, method, node_limit, penalty_scale
        )
        if value <= threshold + tol or scenario in known:
            break
        found.append((scenario, value))
        known.add(scenario)
        if not perturb:
            break
    return found


def separate_lp_relaxation(net: FlowNetwork, x: PathFlow, k: int) -> Tuple[np.ndarray, float]:
    """Fractional interdiction: z_e in [0, 1] per arc and the LP bound on destroyed flow."""
    z_values = np.zeros(net.arc_count)
    if not x.rates or k <= 0:
        return z_values, 0.0
    interdictable = net.interdictable_arcs()
    used = {arc for path in x.rates for arc in path.arcs}
    arcs = [arc for arc in interdictable if arc in used]
    rates, matrix = incidence(x, arcs)

    lp = LinearProgram("max", "interdiction_relaxation")
    z = [lp.add_variable(0.0, 0.0, 1.0, name=f"z{arc}") for arc in arcs]
    w = [lp.add_variable(float(rate), 0.0, 1.0, name=f"w{i}") for i, rate in enumerate(rates)]
    for i in range(len(w)):
        covering = [(z[j], -1.0) for j in np.flatnonzero(matrix[i])]
        lp.add_constraint([(w[i], 1.0)] + covering, "<=", 0.0)
    if z:
        lp.add_constraint([(col, 1.0) for col in z], "<=", float(min(k, len(interdictable))))

    result = solve_lp(lp)
    if not result.optimal:
        raise RuntimeError(f"Interdiction relaxation ended with status {result.status}")
    for j, arc in enumerate(arcs):
        z_values[arc] = result.x[z[j]]
    return z_values, float(result.objective)


def _greedy_choice(
    net: FlowNetwork, x: PathFlow, pools: Pools, penalty: Optional[Dict[int, float]] = None
) -> Tuple[int, ...]:
    penalty = penalty or {}
    loaded_pools = _loaded_pools(x, pools)
    arcs = sorted(arc for loaded, _ in loaded_pools for arc in loaded)
    rates, matrix = incidence(x, arcs)
    column = {arc: j for j, arc in enumerate(arcs)}
    remaining = [min(count, len(loaded)) for loaded, count in loaded_pools]
    pool_of = {arc: p for p, (loaded, _) in enumerate(loaded_pools) for arc in loaded}

    alive = np.ones(len(rates), dtype=bool)
    chosen: List[int] = []
    while any(remaining):
        best_arc, best_gain = None, -math.inf
        for arc in arcs:
            if arc in chosen or remaining[pool_of[arc]] == 0:
                continue
            gain = float(rates[alive & matrix[:, column[arc]]].sum()) - penalty.get(arc, 0.0)
            if gain > best_gain + 1e-12:
                best_arc, best_gain = arc, gain
        if best_arc is None:
            break
        chosen.append(best_arc)
        remaining[pool_of[best_arc]] -= 1
        alive &= ~matrix[:, column[best_arc]]
    return tuple(sorted(chosen))


def greedy_coverage(net: FlowNetwork, x: PathFlow, k: int, pools: Optional[Pools] = None) -> Scenario:
    """Greedy weighted coverage: repeatedly take the arc destroying the most new flow."""
    pools = robust_pools(net, k) if pools is None else pools
    return pad_scenario(pools, _greedy_choice(net, x, pools))


def _upper_bound_by_scenarios(net: FlowNetwork, k: int) -> float:
    interdictable = net.interdictable_arcs()
    caps = net.capacities()
    best = math.inf
    for eta in itertools.combinations(interdictable, min(k, len(interdictable))):
        damaged = caps.copy()
        damaged[list(eta)] = 0.0
        value, _ = max_flow(net, damaged)
        best = min(best, value)
    return best


def _upper_bound_by_cuts(net: FlowNetwork, k: int, chunk: int = 4096) -> float:
    # min over s-t cuts of cut capacity minus its k largest interdictable capacities
    inner = [v for v in range(net.node_count) if v not in (net.source, net.sink)]
    tails = np.array([arc.tail for arc in net.arcs], dtype=int)
    heads = np.array([arc.head for arc in net.arcs], dtype=int)
    caps = net.capacities()
    interdictable = np.array([not arc.safe for arc in net.arcs], dtype=bool)
    bits = np.arange(len(inner), dtype=np.int64)

    best = math.inf
    total = 1 << len(inner)
    for start in range(0, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        members = np.zeros((masks.size, net.node_count), dtype=bool)
        members[:, net.source] = True
        if inner:
            members[:, inner] = ((masks[:, None] >> bits[None, :]) & 1).astype(bool)
        cut = members[:, tails] & ~members[:, heads]
        capacity = cut.astype(float) @ caps
        removable = np.where(cut & interdictable, caps, 0.0)
        if k > 0:
            removable = np.sort(removable, axis=1)[:, -k:].sum(axis=1)
        else:
            removable = np.zeros(masks.size)
        best = min(best, float((capacity - removable).min()))
    return max(best, 0.0)


def interdiction_upper_bound(net: FlowNetwork, k: int, limit: Optional[int] = None) -> float:
    """min over scenarios of the max-flow of the damaged network.

    Exact, by enumerating scenarios or s-t node cuts, whichever is fewer.
    """
    limit = config["SCENARIO_ENUMERATION_LIMIT"] if limit is None else limit
    interdictable = net.interdictable_arcs()
    scenarios = int(comb(len(interdictable), min(max(k, 0), len(interdictable)), exact=True))
    cuts = 1 << max(net.node_count - 2, 0)
    cut_limit = config["CUT_ENUMERATION_LIMIT"]

    if scenarios <= limit and (scenarios <= cuts or cuts > cut_limit):
        return _upper_bound_by_scenarios(net, k)
    if cuts <= cut_limit:
        return _upper_bound_by_cuts(net, min(max(k, 0), len(interdictable)))
    raise EnumerationLimitError("interdiction bound scenarios", limit, scenarios)
