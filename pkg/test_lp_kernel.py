#!/usr/bin/env python3
"""
Tests for the LP / MILP engine.

Usage:
    python test_lp_kernel.py
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from flows import enumerate_simple_paths, max_flow
from instances import gen_random
from lp_kernel import LinearProgram, solve_lp, solve_mip


def test_single_bound_row():
    print("\n🧪 max x s.t. x <= 3")
    lp = LinearProgram("max")
    x = lp.add_variable(1.0)
    lp.add_constraint([(x, 1.0)], "<=", 3.0)
    result = solve_lp(lp)
    assert result.optimal
    assert abs(result.objective - 3.0) < 1e-9
    assert abs(result.duals[0] - 1.0) < 1e-9
    print("✅ PASS")


def test_two_variables():
    print("\n🧪 max x + y s.t. x + y <= 1")
    lp = LinearProgram("max")
    x = lp.add_variable(1.0)
    y = lp.add_variable(1.0)
    lp.add_constraint({x: 1.0, y: 1.0}, "<=", 1.0)
    result = solve_lp(lp)
    assert result.optimal
    assert abs(result.objective - 1.0) < 1e-9
    assert result.x.min() >= -1e-12
    print("✅ PASS")


def test_minimization_duals():
    print("\n🧪 min x + y with >= rows and strong duality")
    lp = LinearProgram("min")
    x = lp.add_variable(1.0)
    y = lp.add_variable(1.0)
    lp.add_constraint([(x, 1.0), (y, 2.0)], ">=", 2.0)
    lp.add_constraint([(x, 3.0), (y, 1.0)], ">=", 3.0)
    result = solve_lp(lp)
    assert result.optimal
    assert abs(result.objective - 1.4) < 1e-9
    assert np.allclose(result.x, [0.8, 0.6], atol=1e-9)
    assert np.allclose(result.duals, [0.4, 0.2], atol=1e-9)
    assert abs(float(np.dot(result.duals, lp.rhs)) - result.objective) < 1e-9
    print("✅ PASS")


def test_equality_and_free_columns():
    print("\n🧪 Equality rows and free variables")
    lp = LinearProgram("max")
    x = lp.add_variable(1.0, lb=-np.inf, ub=np.inf)
    y = lp.add_variable(-1.0, lb=-5.0, ub=5.0)
    lp.add_constraint([(x, 1.0), (y, -1.0)], "==", 2.0)
    lp.add_constraint([(x, 1.0)], "<=", 4.0)
    result = solve_lp(lp)
    assert result.optimal
    # x - y = 2 makes the objective x - y = 2 for every feasible point
    assert abs(result.objective - 2.0) < 1e-9
    assert abs(result.x[0] - result.x[1] - 2.0) < 1e-9
    print("✅ PASS")


def test_infeasible_and_unbounded():
    print("\n🧪 Infeasible and unbounded statuses")
    lp = LinearProgram("max")
    x = lp.add_variable(1.0)
    lp.add_constraint([(x, 1.0)], "<=", 1.0)
    lp.add_constraint([(x, 1.0)], ">=", 2.0)
    assert solve_lp(lp).status == "infeasible"

    lp = LinearProgram("max")
    x = lp.add_variable(1.0)
    y = lp.add_variable(0.0)
    lp.add_constraint([(x, 1.0), (y, -1.0)], "<=", 1.0)
    assert solve_lp(lp).status == "unbounded"
    print("✅ PASS")


def test_path_lp_equals_max_flow():
    print("\n🧪 Nominal path LP equals max flow")
    for seed in range(5):
        net = gen_random(6, 15, seed)
        paths = enumerate_simple_paths(net)
        lp = LinearProgram("max")
        for _ in paths:
            lp.add_variable(1.0)
        for e in range(net.arc_count):
            users = [(i, 1.0) for i, p in enumerate(paths) if e in p.arcs]
            if users:
                lp.add_constraint(users, "<=", net.arcs[e].capacity)
        value = solve_lp(lp).objective if paths else 0.0
        assert abs(value - max_flow(net)[0]) < 1e-6
    print("✅ PASS")


def test_knapsack_mip():
    print("\n🧪 Binary knapsack")
    lp = LinearProgram("max")
    a = lp.add_variable(2.0, 0.0, 1.0, integer=True)
    b = lp.add_variable(3.0, 0.0, 1.0, integer=True)
    lp.add_constraint([(a, 1.0), (b, 1.0)], "<=", 1.0)
    result = solve_mip(lp)
    assert result.optimal
    assert abs(result.objective - 3.0) < 1e-9
    assert result.branches == 0

    lp = LinearProgram("max")
    cols = [lp.add_variable(c, 0.0, 1.0, integer=True) for c in (5.0, 4.0, 3.0)]
    for row, rhs in (((2, 3, 1), 5), ((4, 1, 2), 11), ((3, 4, 2), 8)):
        lp.add_constraint(list(zip(cols, row)), "<=", rhs)
    result = solve_mip(lp)
    assert abs(result.objective - 9.0) < 1e-9
    assert np.allclose(result.x, [1.0, 1.0, 0.0])
    print("✅ PASS")


def test_branching_and_node_limit():
    print("\n🧪 Branching and node limit")
    lp = LinearProgram("max")
    x = lp.add_variable(1.0, 0.0, 1.0, integer=True)
    y = lp.add_variable(1.0, 0.0, 1.0, integer=True)
    lp.add_constraint([(x, 2.0), (y, 2.0)], "<=", 3.0)
    result = solve_mip(lp)
    assert result.optimal
    assert abs(result.objective - 1.0) < 1e-9
    assert result.branches >= 1
    assert result.bound >= result.objective - 1e-9

    limited = solve_mip(lp, node_limit=1)
    assert limited.status == "node_limit"
    assert abs(limited.bound - 1.5) < 1e-9
    print("✅ PASS")


def test_dropped_node_is_not_optimal():
    print("\n🧪 A node LP out of iterations leaves the MIP unproven")
    lp = LinearProgram("max")
    x = lp.add_variable(1.0, 0.0, 1.0, integer=True)
    y = lp.add_variable(1.0, 0.0, 1.0, integer=True)
    lp.add_constraint([(x, 2.0), (y, 2.0)], "<=", 3.0)
    # Both children of the fractional root need a pivot
    dropped = solve_mip(lp, node_iteration_limit=0)
    assert not dropped.optimal
    assert dropped.status == "node_limit"
    assert dropped.x is None
    assert abs(dropped.bound - 1.5) < 1e-9

    started = solve_mip(lp, incumbent=[1.0, 0.0], node_iteration_limit=0)
    assert started.status == "node_limit"
    assert abs(started.objective - 1.0) < 1e-9
    assert abs(started.bound - 1.5) < 1e-9
    print("✅ PASS")


def test_to_text():
    print("\n🧪 LP text dump")
    lp = LinearProgram("max", "dump")
    x = lp.add_variable(1.0, name="x")
    lp.add_constraint([(x, 2.0)], "<=", 4.0, name="cap")
    text = lp.to_text()
    assert text.startswith("LP dump max")
    assert "cap: 2 x <= 4" in text
    print("✅ PASS")


def main():
    """Run all tests."""
    print("\n" + "=" * 50)
    print("🧪 LP kernel - Test Suite")
    print("=" * 50)

    tests = [
        test_single_bound_row,
        test_two_variables,
        test_minimization_duals,
        test_equality_and_free_columns,
        test_infeasible_and_unbounded,
        test_path_lp_equals_max_flow,
        test_knapsack_mip,
        test_branching_and_node_limit,
        test_dropped_node_is_not_optimal,
        test_to_text,
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
