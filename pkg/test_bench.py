#!/usr/bin/env python3
"""
Acceptance-size checks: oracle equivalence, heuristic guarantee, gap structure,
minimax equality, bound coverage and hybrid consistency over many instances.

Slow: expect several minutes with the bundled simplex kernel.

Usage:
    python test_bench.py
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import bench
from driver import SolverConfig, solve_hybrid, solve_robust
from flows import enumerate_simple_paths
from heuristic import approximation_bound, solve_heuristic, verify_guarantee
from hybrid_stats import PartitionSpec, bound_coverage, minimax_check
from instances import gen_random
from network import Arc, EnumerationLimitError, FlowNetwork, Scenario

ORACLE_INSTANCES = 200
GUARANTEE_INSTANCES = 100
HYBRID_INSTANCES = 50


def small_random(seed):
    return gen_random(5 + seed % 2, 8 + seed % 5, seed, safe_fraction=0.1 * (seed % 3))


def few_paths(net, limit=40):
    try:
        enumerate_simple_paths(net, limit)
    except EnumerationLimitError:
        return False
    return True


def test_full_size_p2_gaps_vanish():
    print("\n🧪 P2 (n=5, m0=20), k=5: both gaps are zero on three seeds")
    for seed in range(3):
        row, _, _ = bench.run_cell({"family": "p2", "params": {"n": 5, "m0": 20}, "k": 5, "seed": seed})
        assert row["status"] == "converged", row
        assert abs(row["heuristic_gap"]) < 1e-6, row
        assert abs(row["interdiction_gap"]) < 1e-6, row
    print("✅ PASS")


def test_oracle_equivalence():
    print(f"\n🧪 Separation equals the full LP on {ORACLE_INSTANCES} random instances")
    checked = 0
    seed = 0
    while checked < ORACLE_INSTANCES:
        net = small_random(seed)
        seed += 1
        assert seed < 4 * ORACLE_INSTANCES, f"only {checked} instances with few paths"
        if not few_paths(net):
            continue
        for k in (1, 2, 3):
            optimum = bench.run_oracle(net, k)
            _, value, state = solve_robust(net, SolverConfig(k=k))
            assert state.converged, (seed, k, state.summary())
            assert state.gap <= 1e-6
            assert abs(value - optimum) <= 1e-6 + 1e-9, (seed, k, value, optimum)
            for record in state.records:
                assert record["primal_bound"] <= record["dual_bound"] + 1e-9
            _, heuristic_value = solve_heuristic(net, k)
            if optimum > 1e-9 and not any(arc.safe for arc in net.arcs):
                assert heuristic_value / optimum >= approximation_bound(k) - 1e-9, (seed, k)
            if checked % 10 == 0:
                _, restricted, _ = solve_robust(net, SolverConfig(k=k, max_interdictions=10))
                assert abs(restricted - value) <= 1e-4 * max(abs(value), 1.0)
            checked += 1
    print(f"   {checked} instances from {seed} seeds")
    print("✅ PASS")


def test_heuristic_guarantee():
    print(f"\n🧪 Heuristic attains |x| - k max load on {GUARANTEE_INSTANCES} instances without safe arcs")
    for seed in range(GUARANTEE_INSTANCES):
        net = gen_random(7, 16, seed)
        k = 1 + seed % 3
        x, _ = solve_heuristic(net, k)
        assert verify_guarantee(net, x, k, 1e-6), (seed, k)
    print("✅ PASS")


def test_minimax_suite():
    print("\n🧪 Minimax equality over one to three classes")
    weightings = [
        ([1], [1.0]),
        ([1, 2], [1.0, 0.0]),
        ([1, 2], [0.0, 1.0]),
        ([1, 2], [0.5, 0.5]),
        ([1, 2], [0.2, 0.8]),
        ([0, 1, 2], [1 / 3, 1 / 3, 1 / 3]),
        ([0, 1, 2], [0.0, 0.0, 1.0]),
        ([0, 1, 2], [0.6, 0.4, 0.0]),
        ([0, 1, 2], [0.1, 0.3, 0.6]),
    ]
    count = 0
    for seed in range(3):
        net = gen_random(5, 8, seed)
        for ks, weights in weightings:
            lhs, rhs, ok = minimax_check(net, PartitionSpec.cardinality(ks), weights)
            assert ok, (seed, ks, weights, lhs, rhs)
            count += 1
    assert count >= 20
    print("✅ PASS")


def six_arcs():
    # Two layers of three parallel arcs
    capacities = (3.0, 2.0, 1.0, 1.0, 2.0, 3.0)
    arcs = tuple(Arc(tail=e // 3, head=e // 3 + 1, capacity=c) for e, c in enumerate(capacities))
    return FlowNetwork(node_count=3, arcs=arcs, source=0, sink=2)


def test_bound_coverage_at_scale():
    print("\n🧪 Generalization bound holds in at least 95% of 500 trials")
    net = six_arcs()
    spec = PartitionSpec.cardinality([1, 2])
    distribution = [
        (Scenario.of([0]), 0.3),
        (Scenario.of([4]), 0.2),
        (Scenario.of([1, 3]), 0.3),
        (Scenario.of([2, 5]), 0.2),
    ]
    fixed = bound_coverage(net, spec, distribution, 200, 0.1, 500, seed=0)
    assert fixed["trials"] == 500
    assert fixed["coverage"] >= 0.95, fixed
    refit = bound_coverage(net, spec, distribution, 200, 0.1, 500, seed=1, data_dependent=True)
    assert refit["coverage"] >= 0.95, refit
    print("✅ PASS")


def test_hybrid_single_class_is_robust():
    print(f"\n🧪 Hybrid solve with one class equals the robust solve on {HYBRID_INSTANCES} instances")
    for seed in range(HYBRID_INSTANCES):
        net = gen_random(6, 12, seed, safe_fraction=0.1)
        k = 1 + seed % 3
        _, robust, _ = solve_robust(net, SolverConfig(k=k))
        _, hybrid, state = solve_hybrid(net, PartitionSpec.cardinality([k]), [1.0], SolverConfig(k=k))
        assert state.converged
        assert abs(robust - hybrid) <= 1e-6 + 1e-9, (seed, k, robust, hybrid)
    print("✅ PASS")


def main():
    """Run all tests."""
    print("\n" + "=" * 50)
    print("🧪 Bench - Acceptance Suite")
    print("=" * 50)

    tests = [
        test_full_size_p2_gaps_vanish,
        test_oracle_equivalence,
        test_heuristic_guarantee,
        test_minimax_suite,
        test_bound_coverage_at_scale,
        test_hybrid_single_class_is_robust,
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
