"""
Flow computations on a FlowNetwork: scenario values, max-flow / min-cut,
path decomposition, simple path enumeration and shortest paths.
"""

import heapq
import itertools
import math
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.special import comb

from config import config
from network import EnumerationLimitError, FlowNetwork, Path, PathFlow, Scenario

EPS = 1e-12


def val_eta(net: FlowNetwork, x: PathFlow, eta: Scenario) -> float:
    """Flow on paths avoiding every arc of the scenario."""
    net.check_scenario(eta)
    removed = set(eta.arcs)
    return float(sum(rate for path, rate in x.rates.items() if not path.hits(removed)))


def destroyed(net: FlowNetwork, x: PathFlow, eta: Scenario) -> float:
    """Flow on paths intersecting the scenario."""
    net.check_scenario(eta)
    removed = set(eta.arcs)
    return float(sum(rate for path, rate in x.rates.items() if path.hits(removed)))


def incidence(x: PathFlow, arcs: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Rates of x and the (paths x arcs) boolean incidence on the given arcs."""
    column = {arc: j for j, arc in enumerate(arcs)}
    items = x.items()
    rates = np.array([rate for _, rate in items], dtype=float)
    matrix = np.zeros((len(items), len(arcs)), dtype=bool)
    for i, (path, _) in enumerate(items):
        for arc in path.arcs:
            j = column.get(arc)
            if j is not None:
                matrix[i, j] = True
    return rates, matrix


def loaded_interdictable_arcs(net: FlowNetwork, x: PathFlow) -> List[int]:
    used = {arc for path in x.rates for arc in path.arcs}
    return [arc for arc in net.interdictable_arcs() if arc in used]


def max_destroyed_by_enumeration(
    net: FlowNetwork,
    x: PathFlow,
    pools: Sequence[Tuple[Sequence[int], int]],
    limit: int,
    penalty: Optional[Dict[int, float]] = None,
) -> Tuple[Tuple[int, ...], float]:
    """Largest destroyed flow over scenarios picking `count` arcs from each pool.

    Only loaded arcs are enumerated; the returned choice is the lexicographically
    smallest optimal one before padding. With `penalty` the objective is the
    destroyed flow minus the penalties of the chosen arcs. Raises
    EnumerationLimitError past `limit`.
    """
    penalty = penalty or {}
    used = {arc for path in x.rates for arc in path.arcs}
    reduced = []
    total_count = 1
    for pool, count in pools:
        loaded = [arc for arc in pool if arc in used]
        take = min(count, len(loaded))
        reduced.append((loaded, take))
        total_count *= int(comb(len(loaded), take, exact=True))
    if total_count > limit:
        raise EnumerationLimitError("interdiction scenarios", limit, total_count)

    arcs = sorted({arc for loaded, _ in reduced for arc in loaded})
    column = {arc: j for j, arc in enumerate(arcs)}
    rates, matrix = incidence(x, arcs)

    best_value = -math.inf
    best_choice: Tuple[int, ...] = ()
    choices = itertools.product(*(itertools.combinations(loaded, take) for loaded, take in reduced))
    for parts in choices:
        choice = tuple(sorted(arc for part in parts for arc in part))
        if choice:
            hit = matrix[:, [column[arc] for arc in choice]].any(axis=1)
            value = float(rates[hit].sum())
        else:
            value = 0.0
        value -= sum(penalty.get(arc, 0.0) for arc in choice)
        if value > best_value + 1e-12 or (abs(value - best_value) <= 1e-12 and choice < best_choice):
            best_value = value
            best_choice = choice
    return best_choice, best_value


def pad_scenario(pools: Sequence[Tuple[Sequence[int], int]], chosen: Sequence[int]) -> Scenario:
    """Fill each pool up to its count with its lowest unused arcs."""
    chosen_set = set(chosen)
    arcs = list(chosen)
    for pool, count in pools:
        have = sum(1 for arc in pool if arc in chosen_set)
        for arc in pool:
            if have >= count:
                break
            if arc not in chosen_set:
                arcs.append(arc)
                chosen_set.add(arc)
                have += 1
    return Scenario.of(arcs)


def robust_value(net: FlowNetwork, x: PathFlow, k: int, limit: Optional[int] = None) -> float:
    """RVal(x): surviving flow under the worst scenario of exactly k interdictable arcs."""
    limit = config["SCENARIO_ENUMERATION_LIMIT"] if limit is None else limit
    total = x.total()
    if k <= 0 or not x.rates:
        return total
    interdictable = net.interdictable_arcs()
    if k >= len(interdictable):
        return val_eta(net, x, Scenario.of(interdictable))
    try:
        _, worst = max_destroyed_by_enumeration(net, x, [(interdictable, k)], limit)
    except EnumerationLimitError:
        from interdiction import separate_exact

        _, worst = separate_exact(net, x, k)
    return max(total - worst, 0.0)


def _residual_graph(net: FlowNetwork, caps: np.ndarray):
    # Arc i owns residual edges 2i (forward) and 2i+1 (backward).
    head = []
    residual = []
    adjacency = [[] for _ in range(net.node_count)]
    for index, arc in enumerate(net.arcs):
        head.append(arc.head)
        residual.append(float(caps[index]))
        head.append(arc.tail)
        residual.append(0.0)
        adjacency[arc.tail].append(2 * index)
        adjacency[arc.head].append(2 * index + 1)
    return head, residual, adjacency


def _dinic(net: FlowNetwork, caps: np.ndarray):
    s, t, n = net.source, net.sink, net.node_count
    head, residual, adjacency = _residual_graph(net, caps)
    total = 0.0

    while True:
        level = [-1] * n
        level[s] = 0
        queue = [s]
        for v in queue:
            for e in adjacency[v]:
                w = head[e]
                if level[w] < 0 and residual[e] > EPS:
                    level[w] = level[v] + 1
                    queue.append(w)
        if level[t] < 0:
            break

        pointer = [0] * n
        while True:
            stack: List[int] = []
            v = s
            while v != t:
                advanced = False
                edges = adjacency[v]
                while pointer[v] < len(edges):
                    e = edges[pointer[v]]
                    w = head[e]
                    if residual[e] > EPS and level[w] == level[v] + 1:
                        stack.append(e)
                        v = w
                        advanced = True
                        break
                    pointer[v] += 1
                if not advanced:
                    if v == s:
                        break
                    level[v] = -1
                    e = stack.pop()
                    v = head[e ^ 1]
                    pointer[v] += 1
            if v != t:
                break
            bottleneck = min(residual[e] for e in stack)
            for e in stack:
                residual[e] -= bottleneck
                residual[e ^ 1] += bottleneck
            total += bottleneck

    flows = np.array([residual[2 * i + 1] for i in range(net.arc_count)], dtype=float)
    flows = np.clip(flows, 0.0, caps)
    return total, flows, head, residual, adjacency


def _capacities(net: FlowNetwork, cap_override: Optional[Sequence[float]]) -> np.ndarray:
    if cap_override is None:
        return net.capacities()
    caps = np.asarray(cap_override, dtype=float)
    if caps.shape != (net.arc_count,):
        raise ValueError(f"Capacity override needs {net.arc_count} entries, got {caps.shape}")
    if np.any(caps < 0):
        raise ValueError("Capacity override must be nonnegative")
    return caps


def max_flow(net: FlowNetwork, cap_override: Optional[Sequence[float]] = None) -> Tuple[float, np.ndarray]:
    """Maximum s-t flow value and one maximum arc flow (Dinic)."""
    caps = _capacities(net, cap_override)
    _, flows, _, _, _ = _dinic(net, caps)
    value = float(sum(flows[e] for e in net.out_arcs(net.source)) - sum(flows[e] for e in net.in_arcs(net.source)))
    return value, flows


def min_cut(
    net: FlowNetwork, cap_override: Optional[Sequence[float]] = None
) -> Tuple[float, Set[int], List[int], np.ndarray]:
    """Max-flow value, the source side of a minimum cut, its forward arcs and the arc flow."""
    caps = _capacities(net, cap_override)
    _, flows, head, residual, adjacency = _dinic(net, caps)
    value = float(sum(flows[e] for e in net.out_arcs(net.source)) - sum(flows[e] for e in net.in_arcs(net.source)))
    side = {net.source}
    queue = [net.source]
    for v in queue:
        for e in adjacency[v]:
            w = head[e]
            if w not in side and residual[e] > EPS:
                side.add(w)
                queue.append(w)
    cut = [i for i, arc in enumerate(net.arcs) if arc.tail in side and arc.head not in side]
    return value, side, cut, flows


def path_decompose(net: FlowNetwork, arc_flow: Sequence[float], tol: Optional[float] = None) -> PathFlow:
    """Greedy bottleneck peeling of an s-t arc flow into simple paths.

    Cycles met while walking are cancelled and dropped. Raises ValueError if the
    input violates conservation by more than tol.
    """
    tol = config["FEASIBILITY_TOL"] if tol is None else tol
    flow = np.array(arc_flow, dtype=float)
    if flow.shape != (net.arc_count,):
        raise ValueError(f"Arc flow needs {net.arc_count} entries, got {flow.shape}")
    if np.any(flow < -tol):
        raise ValueError(f"Arc flow has negative entries (min {flow.min():g})")
    flow[flow < 0] = 0.0

    scale = max(1.0, float(flow.max(initial=0.0)))
    for v in range(net.node_count):
        if v in (net.source, net.sink):
            continue
        balance = sum(flow[e] for e in net.in_arcs(v)) - sum(flow[e] for e in net.out_arcs(v))
        if abs(balance) > tol * scale * max(1, len(net.in_arcs(v)) + len(net.out_arcs(v))):
            raise ValueError(f"Flow conservation violated at node {v} by {balance:g}")

    flow[flow <= tol] = 0.0
    rates: Dict[Path, float] = {}
    guard = 4 * (net.arc_count + 1) * (net.node_count + 1)

    while guard > 0:
        guard -= 1
        walk: List[int] = []
        position = {net.source: 0}
        v = net.source
        finished = False
        restart = False
        while v != net.sink:
            step = next((e for e in net.out_arcs(v) if flow[e] > 0.0), None)
            if step is None:
                if v == net.source:
                    finished = True
                else:
                    # Dead end: what reaches here is conservation slack.
                    flow[walk[-1]] = 0.0
                    restart = True
                break
            w = net.arcs[step].head
            if w in position:
                cycle = walk[position[w]:] + [step]
                amount = min(flow[e] for e in cycle)
                for e in cycle:
                    flow[e] -= amount
                    if flow[e] <= tol:
                        flow[e] = 0.0
                restart = True
                break
            walk.append(step)
            position[w] = len(walk)
            v = w
        if finished:
            break
        if restart:
            continue
        amount = min(flow[e] for e in walk)
        for e in walk:
            flow[e] -= amount
            if flow[e] <= tol:
                flow[e] = 0.0
        path = Path(arcs=tuple(walk))
        rates[path] = rates.get(path, 0.0) + amount

    return PathFlow(rates)


def enumerate_simple_paths(net: FlowNetwork, limit: Optional[int] = None) -> List[Path]:
    """All simple s-t paths in lexicographic order of their arc index sequences."""
    limit = config["PATH_LIMIT"] if limit is None else limit
    paths: List[Path] = []
    walk: List[int] = []
    on_walk = [False] * net.node_count
    on_walk[net.source] = True
    stack = [(net.source, 0)]

    while stack:
        v, i = stack[-1]
        edges = net.out_arcs(v)
        if i >= len(edges):
            stack.pop()
            on_walk[v] = False
            if walk:
                walk.pop()
            continue
        stack[-1] = (v, i + 1)
        e = edges[i]
        w = net.arcs[e].head
        if on_walk[w]:
            continue
        if w == net.sink:
            paths.append(Path(arcs=tuple(walk + [e])))
            if len(paths) > limit:
                raise EnumerationLimitError("simple s-t paths", limit)
            continue
        on_walk[w] = True
        walk.append(e)
        stack.append((w, 0))

    return paths


def shortest_path(
    net: FlowNetwork, costs: Sequence[float], allowed: Optional[Sequence[bool]] = None
) -> Optional[Tuple[Path, float]]:
    """Cheapest s-t path under nonnegative arc costs over the allowed arcs (Dijkstra)."""
    costs = np.maximum(np.asarray(costs, dtype=float), 0.0)
    dist = [float("inf")] * net.node_count
    parent = [-1] * net.node_count
    done = [False] * net.node_count
    dist[net.source] = 0.0
    heap = [(0.0, net.source)]
    while heap:
        d, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        if v == net.sink:
            break
        for e in net.out_arcs(v):
            if allowed is not None and not allowed[e]:
                continue
            w = net.arcs[e].head
            if done[w]:
                continue
            candidate = d + costs[e]
            if candidate < dist[w]:
                dist[w] = candidate
                parent[w] = e
                heapq.heappush(heap, (candidate, w))
    if not done[net.sink]:
        return None
    arcs = []
    v = net.sink
    while v != net.source:
        e = parent[v]
        arcs.append(e)
        v = net.arcs[e].tail
    arcs.reverse()
    return Path(arcs=tuple(arcs)), dist[net.sink]
