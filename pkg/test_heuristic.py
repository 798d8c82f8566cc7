#!/usr/bin/env python3
"""
Tests for the parametric max-flow heuristic.

Usage:
    python test_heuristic.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from flows import max_flow, robust_value
from heuristic import (
    approximation_bound,
    approximation_check,
    capped_capacities,
    optimal_theta,
    solve_heuristic,
    supporting_line,
    verify_guarantee,
)
from instances import gen_p1, gen_p2, gen_random
from master import solve_full_model
from network import Arc, FlowNetwork


def parallel(count, capacity=1.0):
    arcs = tuple(Arc(tail=0, head=1, capacity=capacity) for _ in range(count))
    return FlowNetwork(node_count=2, arcs=arcs, source=0, sink=1)


def test_parallel_arcs():
    print("\n🧪 Parallel arcs")
    x, value = solve_heuristic(parallel(3), 1)
    assert abs(value - 2.0) < 1e-9
    assert abs(x.total() - 3.0) < 1e-9
    _, value = solve_heuristic(parallel(5), 2)
    assert abs(value - 3.0) < 1e-9
    _, value = solve_heuristic(parallel(2), 2)
    assert value == 0.0
    print("✅ PASS")


def test_k_zero_is_max_flow():
    print("\n🧪 k=0 gives the max flow")
    for seed in range(4):
        net = gen_random(7, 16, seed)
        x, value = solve_heuristic(net, 0)
        assert math.isinf(optimal_theta(net, 0))
        assert abs(value - max_flow(net)[0]) < 1e-7
        assert x.is_feasible(net, 1e-7)
    print("✅ PASS")


def test_capping_skips_safe_arcs():
    print("\n🧪 Capping leaves safe arcs alone")
    net = FlowNetwork(
        node_count=2,
        arcs=(Arc(tail=0, head=1, capacity=4.0), Arc(tail=0, head=1, capacity=4.0, safe=True)),
        source=0,
        sink=1,
    )
    assert list(capped_capacities(net, 1.5)) == [1.5, 4.0]
    value, intercept, slope = supporting_line(net, 1.5)
    assert abs(value - 5.5) < 1e-9
    assert slope == 1 and abs(intercept - 4.0) < 1e-9
    print("✅ PASS")


def test_p1_value():
    print("\n🧪 Heuristic on a small P1 instance")
    net = gen_p1(3, 3)
    _, value = solve_heuristic(net, 1)
    assert abs(value - 4.0) < 1e-9
    print("✅ PASS")


def test_guarantee_without_safe_arcs():
    print("\n🧪 RVal(x*) equals |x*| - k * max load without safe arcs")
    for seed in range(6):
        net = gen_random(7, 16, seed)
        for k in (1, 2):
            x, value = solve_heuristic(net, k)
            assert verify_guarantee(net, x, k)
            assert abs(robust_value(net, x, k) - value) < 1e-6
    print("✅ PASS")


def test_below_optimum_and_ratio():
    print("\n🧪 Heuristic stays below the optimum and above the ratio bound")
    for seed in range(4):
        net = gen_random(6, 14, seed)
        for k in (1, 2):
            optimum, _ = solve_full_model(net, k)
            _, value = solve_heuristic(net, k)
            assert value <= optimum + 1e-6
            ratio = approximation_check(net, k, optimum, value)
            assert ratio >= approximation_bound(k) - 1e-9
    net = gen_p2(3, 2, 0)
    optimum, _ = solve_full_model(net, 1)
    assert solve_heuristic(net, 1)[1] <= optimum + 1e-6
    print("✅ PASS")


def test_approximation_bound():
    print("\n🧪 Approximation bound")
    assert approximation_bound(0) == 1.0
    assert abs(approximation_bound(1) - 2 / 2.25) < 1e-12
    assert abs(approximation_bound(2) - 0.75) < 1e-12
    assert approximation_bound(10) < approximation_bound(2)
    print("✅ PASS")


def main():
    """Run all tests."""
    print("\n" + "=" * 50)
    print("🧪 Heuristic - Test Suite")
    print("=" * 50)

    tests = [
        test_parallel_arcs,
        test_k_zero_is_max_flow,
        test_capping_skips_safe_arcs,
        test_p1_value,
        test_guarantee_without_safe_arcs,
        test_below_optimum_and_ratio,
        test_approximation_bound,
    ]

    results = []
    for test in tests:
        try:
            test()
            results.append(True)
        except Exception as e:
            print(f"\n❌ Test failed with exception: {e}")
            import traceback

            traceback.print_exc()
            results.append(False)

    print("\n" + "=" * 50)
    print("📊 Test Summary")
    print("=" * 50)
    passed = sum(results)
    total = len(results)
    print(f"\n{passed}/{total} tests passed")
    if passed == total:
        print("\n✅ All tests passed!")
        return 0
    print(f"\n❌ {total - passed} test(s) failed")
    return 1


if __name__ == "__main__":
    sys.exit(main())
