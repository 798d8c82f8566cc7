#!/usr/bin/env python3
"""
Tests for path pricing against master duals.

Usage:
    python test_pricing.py
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from flows import enumerate_simple_paths
from instances import gen_random
from master import all_scenarios, solve_restricted_master
from network import Arc, FlowNetwork, Path, Scenario
from pricing import DualPrices, PricingIncompleteError, backend_for, best_path, price_path, price_path_hybrid


def parallel(count, capacity=1.0):
    arcs = tuple(Arc(tail=0, head=1, capacity=capacity) for _ in range(count))
    return FlowNetwork(node_count=2, arcs=arcs, source=0, sink=1)


def diamond():
    arcs = (
        Arc(tail=0, head=1, capacity=3),
        Arc(tail=0, head=2, capacity=2),
        Arc(tail=1, head=2, capacity=1),
        Arc(tail=1, head=3, capacity=2),
        Arc(tail=2, head=3, capacity=3, safe=True),
    )
    return FlowNetwork(node_count=4, arcs=arcs, source=0, sink=3)


def test_zero_prices():
    print("\n🧪 Zero duals price every path at 1")
    net = diamond()
    path, price = price_path(net, DualPrices([0.0] * 5, {}))
    net.check_path(path)
    assert abs(price - 1.0) < 1e-12
    print("✅ PASS")


def test_saturated_arc_price():
    print("\n🧪 Arc price 1 leaves nothing to price")
    net = parallel(1)
    assert price_path(net, DualPrices([1.0], {})) is None
    found = best_path(net, DualPrices([1.0], {}))
    assert found is not None and abs(found[1]) < 1e-12
    print("✅ PASS")


def test_reduced_price():
    print("\n🧪 reduced_price")
    prices = DualPrices([0.2, 0.3], {Scenario.of([0]): 0.1, Scenario.of([1]): 0.0})
    assert len(prices) == 1
    assert abs(prices.reduced_price(Path(arcs=(0,))) - 0.7) < 1e-12
    assert abs(prices.reduced_price(Path(arcs=(1,))) - 0.7) < 1e-12
    merged = DualPrices.merge([0.0, 0.0], [{Scenario.of([0]): 0.25}, {Scenario.of([0]): 0.25}])
    assert abs(merged.reduced_price(Path(arcs=(0,))) - 0.5) < 1e-12
    print("✅ PASS")


def test_scenario_price_avoided():
    print("\n🧪 A priced scenario steers the path to the other arc")
    net = parallel(2)
    prices = DualPrices([0.0, 0.0], {Scenario.of([0]): 0.6})
    for method in ("enumerate", "mip"):
        path, price = price_path(net, prices, method=method)
        assert path.arcs == (1,)
        assert abs(price - 1.0) < 1e-9
    print("✅ PASS")


def test_epsilon_penalty_prefers_unused_arcs():
    print("\n🧪 Penalized pricing prefers arcs outside the master")
    net = parallel(2)
    prices = DualPrices([0.0, 0.0], {})
    path, price = price_path(net, prices, epsilon_penalty=True, used_arcs=[0])
    assert path.arcs == (1,)
    # The reported price is the unpenalized one
    assert abs(price - 1.0) < 1e-12
    print("✅ PASS")


def test_backends_agree():
    print("\n🧪 Enumeration and MIP pricing agree on master duals")
    for seed in range(5):
        net = gen_random(6, 14, seed)
        paths = enumerate_simple_paths(net)[:2]
        if not paths:
            continue
        master = solve_restricted_master(net, paths, all_scenarios(net, 1)[:5])
        prices = DualPrices.from_master(master)
        by_enumeration = best_path(net, prices, method="enumerate")
        by_mip = best_path(net, prices, method="mip")
        assert (by_enumeration is None) == (by_mip is None)
        if by_enumeration is not None:
            assert abs(by_enumeration[1] - by_mip[1]) < 1e-5
            assert abs(prices.reduced_price(by_enumeration[0]) - by_enumeration[1]) < 1e-12
    print("✅ PASS")


def test_no_path_left_when_pricing_fails():
    print("\n🧪 No simple path has positive reduced price when pricing returns None")
    for seed in range(4):
        net = gen_random(6, 12, seed)
        paths = enumerate_simple_paths(net)
        if not paths:
            continue
        master = solve_restricted_master(net, paths, all_scenarios(net, 1))
        prices = DualPrices.from_master(master)
        assert price_path(net, prices) is None
        assert max(prices.reduced_price(path) for path in paths) <= 1e-7
    print("✅ PASS")


def test_unfinished_mip_raises():
    print("\n🧪 Pricing MIP stopped at the root cannot rule out a path")
    arcs = tuple(Arc(tail=v, head=v + 1, capacity=1.0) for v in (0, 0, 1, 1))
    net = FlowNetwork(node_count=3, arcs=arcs, source=0, sink=2)
    # Every path hits three of the four scenarios; the relaxation halves all four.
    scenarios = {Scenario.of(pair): 0.3 for pair in ([0, 2], [1, 3], [0, 3], [1, 2])}
    prices = DualPrices([0.0] * 4, scenarios)
    try:
        price_path(net, prices, method="mip", node_limit=1)
    except PricingIncompleteError as e:
        assert abs(e.bound - 0.4) < 1e-6
    else:
        raise AssertionError("pricing stopped at the root was reported as complete")
    for method in ("mip", "enumerate"):
        path, price = price_path(net, prices, method=method)
        assert abs(price - 0.1) < 1e-9
        assert abs(prices.reduced_price(path) - 0.1) < 1e-12
    print("✅ PASS")


def test_hybrid_pricing_with_one_class():
    print("\n🧪 Hybrid pricing with one class equals robust pricing")
    net = gen_random(6, 14, 3)
    paths = enumerate_simple_paths(net)[:2]
    if paths:
        master = solve_restricted_master(net, paths, all_scenarios(net, 1)[:4])
        robust = price_path(net, DualPrices.from_master(master))
        hybrid = price_path_hybrid(net, master.arc_duals, [master.scenario_duals])
        assert (robust is None) == (hybrid is None)
        if robust is not None:
            assert abs(robust[1] - hybrid[1]) < 1e-12
    print("✅ PASS")


def test_backend_selection():
    print("\n🧪 Backend selection")
    prices = DualPrices([0.0], {})
    assert backend_for(prices) == "enumerate"
    assert backend_for(prices, "mip") == "mip"
    many = DualPrices([0.0] * 20, {Scenario.of([i]): 0.01 for i in range(20)})
    assert backend_for(many) == "mip"
    try:
        backend_for(prices, "simplex")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown backend accepted")
    print("✅ PASS")


def main():
    """Run all tests."""
    print("\n" + "=" * 50)
    print("🧪 Pricing - Test Suite")
    print("=" * 50)

    tests = [
        test_zero_prices,
        test_saturated_arc_price,
        test_reduced_price,
        test_scenario_price_avoided,
        test_epsilon_penalty_prefers_unused_arcs,
        test_backends_agree,
        test_no_path_left_when_pricing_fails,
        test_unfinished_mip_raises,
        test_hybrid_pricing_with_one_class,
        test_backend_selection,
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
