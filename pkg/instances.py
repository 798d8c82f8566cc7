"""
Instance generators. Every generator is a pure function of its parameters and
seed; random draws come from the named streams in seed.py.
"""

import math
from typing import Iterable, List, Sequence, Tuple

import numpy as np

import console
import seed as seed_helper
from network import Arc, FlowNetwork

RMAT_PRESETS = {
    "a": {"a": 0.5, "b": 0.2, "c": 0.2, "d": 0.1, "nodes": 1000, "arcs": 2000},
    "b": {"a": 0.5, "b": 0.2, "c": 0.2, "d": 0.1, "nodes": 1000, "arcs": 5000},
    "c": {"a": 0.2, "b": 0.2, "c": 0.4, "d": 0.2, "nodes": 1000, "arcs": 5000},
}

RMAT_MAX_ROUNDS = 1000


def _positive(**values):
    for name, value in values.items():
        if value < 1:
            raise ValueError(f"{name} must be at least 1, got {value}")


def gen_p1(M: int, n: int) -> FlowNetwork:
    """Nodes s, v, t with n parallel (s, v) arcs of capacity M and (n-1)*M unit (v, t) arcs."""
    _positive(M=M, n=n)
    arcs = [Arc(tail=0, head=1, capacity=float(M)) for _ in range(n)]
    arcs += [Arc(tail=1, head=2, capacity=1.0) for _ in range((n - 1) * M)]
    return FlowNetwork(node_count=3, arcs=tuple(arcs), source=0, sink=2)


def gen_p2(n: int, m0: int, seed: int) -> FlowNetwork:
    """Series graph v_1..v_n with m0 + Poisson(m0) parallel arcs between consecutive nodes.

    Capacities inside a bundle follow u_i = u_{i-1} + (|eps_i| + 1)^2 starting from 0.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    _positive(m0=m0)
    sizes = m0 + seed_helper.stream(seed, "p2.bundle_sizes").poisson(m0, size=n - 1)
    steps = (np.abs(seed_helper.stream(seed, "p2.capacities").standard_normal(int(sizes.sum()))) + 1.0) ** 2

    arcs = []
    offset = 0
    for j, size in enumerate(sizes):
        capacities = np.cumsum(steps[offset : offset + size])
        offset += size
        arcs += [Arc(tail=j, head=j + 1, capacity=float(u)) for u in capacities]
    return FlowNetwork(node_count=n, arcs=tuple(arcs), source=0, sink=n - 1)


def gen_p3(n: int, m: int, M: int) -> FlowNetwork:
    """n chained blocks: a safe arc of capacity m and an arc of capacity M into v, then m+M unit arcs out."""
    _positive(n=n, m=m, M=M)
    arcs = []
    for block in range(n):
        s, v, t = 2 * block, 2 * block + 1, 2 * block + 2
        arcs.append(Arc(tail=s, head=v, capacity=float(m), safe=True))
        arcs.append(Arc(tail=s, head=v, capacity=float(M)))
        arcs += [Arc(tail=v, head=t, capacity=1.0) for _ in range(m + M)]
    return FlowNetwork(node_count=2 * n + 1, arcs=tuple(arcs), source=0, sink=2 * n)


def _rmat_edges(nodes: int, arcs: int, probabilities: Sequence[float], rng: np.random.Generator) -> List[Tuple[int, int]]:
    levels = max(1, math.ceil(math.log2(nodes)))
    weights = (1 << np.arange(levels - 1, -1, -1)).astype(np.int64)
    edges: List[Tuple[int, int]] = []
    seen = set()
    for _ in range(RMAT_MAX_ROUNDS):
        missing = arcs - len(edges)
        if missing <= 0:
            break
        quadrants = rng.choice(4, size=(2 * missing, levels), p=probabilities)
        tails = (quadrants // 2) @ weights
        heads = (quadrants % 2) @ weights
        for u, v in zip(tails.tolist(), heads.tolist()):
            # Out-of-range draws are rejected so any node count works.
            if u >= nodes or v >= nodes or u == v or (u, v) in seen:
                continue
            seen.add((u, v))
            edges.append((u, v))
            if len(edges) == arcs:
                break
    if len(edges) < arcs:
        raise RuntimeError(f"R-MAT drew only {len(edges)} distinct arcs of {arcs}")
    return edges


def gen_rmat(nodes: int, arcs: int, a: float, b: float, c: float, d: float, seed: int) -> FlowNetwork:
    """R-MAT graph with uniform (0, 1) capacities.

    The node of largest out-degree is the source, the node of largest in-degree
    the sink, and every arc touching either of them is safe.
    """
    probabilities = [a, b, c, d]
    if any(p < 0 for p in probabilities) or abs(sum(probabilities) - 1.0) > 1e-9:
        raise ValueError(f"R-MAT parameters must be nonnegative and sum to 1, got {probabilities}")
    if nodes < 2:
        raise ValueError(f"R-MAT needs at least 2 nodes, got {nodes}")
    if not 1 <= arcs <= nodes * (nodes - 1):
        raise ValueError(f"R-MAT arc count must lie in 1..{nodes * (nodes - 1)}, got {arcs}")

    edges = _rmat_edges(nodes, arcs, probabilities, seed_helper.stream(seed, "rmat.edges"))
    capacities = 1.0 - seed_helper.stream(seed, "rmat.capacities").random(arcs)

    out_degree = np.zeros(nodes, dtype=int)
    in_degree = np.zeros(nodes, dtype=int)
    for u, v in edges:
        out_degree[u] += 1
        in_degree[v] += 1
    source = int(np.argmax(out_degree))
    in_degree[source] = -1
    sink = int(np.argmax(in_degree))

    terminals = {source, sink}
    network_arcs = tuple(
        Arc(tail=u, head=v, capacity=float(cap), safe=u in terminals or v in terminals)
        for (u, v), cap in zip(edges, capacities)
    )
    console.debug(f"R-MAT source {source}, sink {sink}, {sum(arc.safe for arc in network_arcs)} safe arcs")
    return FlowNetwork(node_count=nodes, arcs=network_arcs, source=source, sink=sink)


def gen_random(
    nodes: int, arcs: int, seed: int, safe_fraction: float = 0.0, max_capacity: int = 10
) -> FlowNetwork:
    """Random multigraph with integer capacities in 1..max_capacity, source 0 and sink nodes-1."""
    if nodes < 2:
        raise ValueError(f"A random network needs at least 2 nodes, got {nodes}")
    _positive(arcs=arcs, max_capacity=max_capacity)
    if not 0.0 <= safe_fraction <= 1.0:
        raise ValueError(f"safe_fraction must lie in [0, 1], got {safe_fraction}")

    rng = seed_helper.stream(seed, "random.arcs")
    tails = rng.integers(0, nodes, size=arcs)
    # Shifting by 1..nodes-1 keeps heads away from tails.
    heads = (tails + rng.integers(1, nodes, size=arcs)) % nodes
    capacities = seed_helper.stream(seed, "random.capacities").integers(1, max_capacity + 1, size=arcs)
    safe = seed_helper.stream(seed, "random.safe").random(arcs) < safe_fraction
    network_arcs = tuple(
        Arc(tail=int(u), head=int(v), capacity=float(cap), safe=bool(flag))
        for u, v, cap, flag in zip(tails, heads, capacities, safe)
    )
    return FlowNetwork(node_count=nodes, arcs=network_arcs, source=0, sink=nodes - 1)


def add_supersource_sink(net: FlowNetwork, sources: Iterable[int], sinks: Iterable[int]) -> FlowNetwork:
    """Join several terminals through a new supersource and supersink with safe arcs.

    Each new arc carries the total capacity leaving (or entering) its terminal,
    so it never binds.
    """
    sources, sinks = list(sources), list(sinks)
    if not sources or not sinks:
        raise ValueError("At least one source and one sink are required")
    for node in sources + sinks:
        if not 0 <= node < net.node_count:
            raise ValueError(f"Terminal {node} is not a node of a {net.node_count}-node network")
    if set(sources) & set(sinks):
        raise ValueError(f"Nodes {sorted(set(sources) & set(sinks))} are both source and sink")

    caps = net.capacities()
    supersource, supersink = net.node_count, net.node_count + 1
    arcs = list(net.arcs)
    for node in sources:
        arcs.append(Arc(tail=supersource, head=node, capacity=float(sum(caps[e] for e in net.out_arcs(node))), safe=True))
    for node in sinks:
        arcs.append(Arc(tail=node, head=supersink, capacity=float(sum(caps[e] for e in net.in_arcs(node))), safe=True))
    return FlowNetwork(node_count=net.node_count + 2, arcs=tuple(arcs), source=supersource, sink=supersink)
