"""
Parametric max-flow heuristic: maximize |x| - k * max_e x_e.

With F(theta) the max-flow value when interdictable capacities are capped at
theta, the heuristic optimum is max_theta F(theta) - k * theta. F is concave and
piecewise linear. A minimum cut at theta gives a supporting line whose slope is
the number of interdictable cut arcs still capped; the maximizer is found by
intersecting supporting lines, or by bisecting on the slope for large networks.
Safe arcs are never capped.
"""

import math
from typing import Optional, Tuple

import numpy as np

import console
from config import config
from flows import max_flow, min_cut, path_decompose, robust_value
from network import FlowNetwork, PathFlow

SCAN_ITERATIONS = 10_000


def capped_capacities(net: FlowNetwork, theta: float) -> np.ndarray:
    caps = net.capacities().copy()
    interdictable = list(net.interdictable_arcs())
    if interdictable:
        caps[interdictable] = np.minimum(caps[interdictable], theta)
    return caps


def supporting_line(net: FlowNetwork, theta: float) -> Tuple[float, float, int]:
    """F(theta), and intercept and slope of a line touching F at theta from above."""
    caps = capped_capacities(net, theta)
    value, _, cut, _ = min_cut(net, caps)
    raw = net.capacities()
    slope = sum(1 for e in cut if not net.arcs[e].safe and raw[e] > theta + 1e-12)
    return value, value - slope * theta, slope


def _intersection_search(net: FlowNetwork, k: int, top: float) -> float:
    _, intercept_left, slope_left = supporting_line(net, 0.0)
    if slope_left <= k:
        return 0.0
    _, intercept_right, slope_right = supporting_line(net, top)
    left, right = 0.0, top
    scale = max(1.0, float(net.capacities().sum()))

    for _ in range(SCAN_ITERATIONS):
        if slope_left == slope_right:
            break
        theta = (intercept_right - intercept_left) / (slope_left - slope_right)
        theta = min(max(theta, left), right)
        value, intercept, slope = supporting_line(net, theta)
        if value >= intercept_left + slope_left * theta - 1e-9 * scale:
            return theta
        if slope == k:
            return theta
        if slope > k:
            left, intercept_left, slope_left = theta, intercept, slope
        else:
            right, intercept_right, slope_right = theta, intercept, slope
        if right - left <= 1e-12 * max(1.0, top):
            break
    console.warn("Breakpoint search did not close; using the better end of the bracket")
    return _better_end(net, k, left, right)


def _bisection_search(net: FlowNetwork, k: int, top: float) -> float:
    left, right = 0.0, top
    if supporting_line(net, 0.0)[2] <= k:
        return 0.0
    while right - left > 1e-9 * max(1.0, top):
        theta = 0.5 * (left + right)
        if supporting_line(net, theta)[2] > k:
            left = theta
        else:
            right = theta
    return _better_end(net, k, left, right)


def _better_end(net: FlowNetwork, k: int, left: float, right: float) -> float:
    value_left = max_flow(net, capped_capacities(net, left))[0] - k * left
    value_right = max_flow(net, capped_capacities(net, right))[0] - k * right
    return right if value_right > value_left else left


def optimal_theta(net: FlowNetwork, k: int) -> float:
    interdictable = net.interdictable_arcs()
    if not interdictable or k <= 0:
        return math.inf
    top = float(net.capacities()[list(interdictable)].max())
    if net.arc_count <= config["BREAKPOINT_SCAN_MAX_ARCS"]:
        return _intersection_search(net, k, top)
    return _bisection_search(net, k, top)


def solve_heuristic(net: FlowNetwork, k: int) -> Tuple[PathFlow, float]:
    """Path flow maximizing |x| - k * max interdictable load, and that value."""
    theta = optimal_theta(net, k)
    caps = net.capacities() if math.isinf(theta) else capped_capacities(net, theta)
    _, arc_flow = max_flow(net, caps)
    x = path_decompose(net, arc_flow)
    value = x.total() - max(k, 0) * x.max_interdictable_load(net)
    console.debug(f"Heuristic theta {theta:.6g}, flow {x.total():.6g}, value {value:.6g}")
    return x, max(value, 0.0)


def verify_guarantee(net: FlowNetwork, x_star: PathFlow, k: int, tol: Optional[float] = None) -> bool:
    """Whether RVal(x*) equals |x*| - k * max interdictable load."""
    tol = config["VALUE_TOL"] if tol is None else tol
    expected = x_star.total() - k * x_star.max_interdictable_load(net)
    actual = robust_value(net, x_star, k)
    holds = abs(actual - max(expected, 0.0)) <= tol
    if not holds and any(arc.safe for arc in net.arcs):
        console.warn(f"Heuristic guarantee differs on a network with safe arcs: {actual:.9g} vs {expected:.9g}")
    return holds


def approximation_bound(k: int) -> float:
    return (k + 1) / (k * k / 4 + k + 1)


def approximation_check(
    net: FlowNetwork, k: int, optimum: float, heuristic_value: Optional[float] = None
) -> float:
    """heuristic / optimum, checked against (k+1)/(k^2/4+k+1)."""
    if heuristic_value is None:
        _, heuristic_value = solve_heuristic(net, k)
    if optimum <= config["VALUE_TOL"]:
        return 1.0
    ratio = heuristic_value / optimum
    bound = approximation_bound(k)
    if ratio < bound - 1e-9:
        message = f"Heuristic ratio {ratio:.9g} is below the bound {bound:.9g} for k={k}"
        if any(arc.safe for arc in net.arcs):
            console.warn(message)
        else:
            raise RuntimeError(message)
    return ratio
