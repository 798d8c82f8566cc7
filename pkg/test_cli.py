#!/usr/bin/env python3
"""
Tests for the command line, exit codes and bench reports.

Usage:
    python test_cli.py
"""

import argparse
import io
import json
import os
import sys
import tempfile
from contextlib import redirect_stdout

import pandas as pd

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import bench
from driver import SeparationState
from instances import gen_p1
from network import Arc, FlowNetwork
from network_io import parse_dimacs, write_network
from scripts import robustflow


def parallel(count, capacity=1.0):
    arcs = tuple(Arc(tail=0, head=1, capacity=capacity) for _ in range(count))
    return FlowNetwork(node_count=2, arcs=arcs, source=0, sink=1)


def run(argv):
    out = io.StringIO()
    with redirect_stdout(out):
        code = robustflow.main(argv + ["--log", "quiet"])
    return code, out.getvalue()


def test_solve_and_oracle():
    print("\n🧪 solve and oracle on three parallel arcs")
    with tempfile.TemporaryDirectory() as directory:
        path = os.path.join(directory, "parallel.dimacs")
        trace = os.path.join(directory, "trace.csv")
        write_network(parallel(3), path)
        code, out = run(["solve", "--input", path, "--k", "1", "--output", "json", "--show-flow", "--trace", trace])
        assert code == 0
        result = json.loads(out)
        assert abs(result["value"] - 2.0) < 1e-6
        assert result["status"] == "converged"
        assert abs(sum(entry["rate"] for entry in result["flow"]) - 3.0) < 1e-6
        assert len(pd.read_csv(trace)) == result["iterations"]

        code, out = run(["oracle", "--input", path, "--k", "2", "--output", "json"])
        assert code == 0
        assert abs(json.loads(out)["value"] - 1.0) < 1e-9
    print("✅ PASS")


def test_heuristic_and_interdict():
    print("\n🧪 heuristic and interdict")
    with tempfile.TemporaryDirectory() as directory:
        path = os.path.join(directory, "p1.json")
        write_network(gen_p1(3, 3), path)
        code, out = run(["heuristic", "--input", path, "--k", "1", "--output", "json"])
        assert code == 0
        result = json.loads(out)
        assert abs(result["value"] - 4.0) < 1e-9
        assert result["guarantee_holds"] is True

        code, out = run(["interdict", "--input", path, "--k", "1", "--output", "json"])
        assert code == 0
        result = json.loads(out)
        assert abs(result["destroyed"] - 2.0) < 1e-9
        assert abs(result["robust_value"] - 4.0) < 1e-9
        assert result["interdiction_bound"] >= result["robust_value"] - 1e-9
    print("✅ PASS")


def test_hybrid():
    print("\n🧪 hybrid with weights and with observations")
    with tempfile.TemporaryDirectory() as directory:
        path = os.path.join(directory, "parallel.dimacs")
        observations = os.path.join(directory, "observed.txt")
        write_network(parallel(3), path)
        with open(observations, "w") as f:
            f.write("0\n1 2\n")
        code, out = run(["hybrid", "--input", path, "--classes", "1,2", "--weights", "0.5,0.5", "--output", "json"])
        assert code == 0
        assert abs(json.loads(out)["value"] - 1.5) < 1e-6

        code, out = run(
            ["hybrid", "--input", path, "--classes", "1,2", "--observations", observations, "--delta", "0.1", "--output", "json"]
        )
        assert code == 0
        result = json.loads(out)
        assert result["weights"] == [0.5, 0.5]
        assert result["bound"] < result["empirical"]

        code, _ = run(["hybrid", "--input", path, "--classes", "1,2", "--weights", "0.5,0.6"])
        assert code == 2
    print("✅ PASS")


def test_gen():
    print("\n🧪 gen to stdout and to a file")
    code, out = run(["gen", "--family", "p1", "--M", "2", "--n", "3"])
    assert code == 0
    assert parse_dimacs(out) == gen_p1(2, 3)
    with tempfile.TemporaryDirectory() as directory:
        target = os.path.join(directory, "random.json")
        code, _ = run(["gen", "--family", "random", "--nodes", "5", "--arcs", "9", "--seed", "3", "--out", target])
        assert code == 0
        with open(target) as f:
            assert json.load(f)
    print("✅ PASS")


def test_exit_codes():
    print("\n🧪 Exit codes")
    code, out = run(["solve"])
    assert code == 2 and json.loads(out)["error"] == "usage"
    assert run([])[0] == 2
    assert run(["solve", "--input", "/nonexistent/net.dimacs"])[0] == 2
    assert run(["solve", "--bogus"])[0] == 2
    assert run(["gen", "--family", "grid"])[0] == 2
    with tempfile.TemporaryDirectory() as directory:
        path = os.path.join(directory, "parallel.dimacs")
        write_network(parallel(3), path)
        code, out = run(["oracle", "--input", path, "--limits", "1,,"])
        assert code == 4
        error = json.loads(out)
        assert error["error"] == "enumeration_limit" and error["limit"] == 1
    out = io.StringIO()
    with redirect_stdout(out):
        code = robustflow.finish({"value": 0.0}, SeparationState(), argparse.Namespace(output="json"))
    assert code == 3
    assert '"not_converged"' in out.getvalue()
    print("✅ PASS")


def test_limits_parsing():
    print("\n🧪 --limits parsing")
    assert robustflow.parse_limits("10,,5") == {"path_limit": 10, "node_limit": 5}
    assert robustflow.parse_limits(None) == {}
    for bad in ("1,2", "a,1,1"):
        try:
            robustflow.parse_limits(bad)
        except ValueError:
            continue
        raise AssertionError(f"limits '{bad}' accepted")
    print("✅ PASS")


def test_report_formatting():
    print("\n🧪 Bench gap formatting and quantiles")
    assert bench.format_gap(0.0) == "0"
    assert bench.format_gap(0.0123456) == "0.01235"
    assert bench.format_gap(0.125, percent=True) == "12.5%"
    assert bench.format_gap(float("nan")) == "-"
    assert bench.quantile([]) == 0.0
    assert bench.quantile([5.0]) == 5.0
    assert abs(bench.quantile([float(i) for i in range(1, 11)]) - 9.1) < 1e-12
    assert bench.relative_gap(4.0, 3.0) == 0.25
    assert bench.relative_gap(0.0, 0.0) == 0.0
    rows = pd.DataFrame([{"family": "p1", "heuristic_gap": 0.0, "interdiction_gap": 0.5, "seconds": 0.25}])
    table = bench.report(rows, "table", percent=True)
    assert "50%" in table and "0.25s" in table
    assert json.loads(bench.report(rows, "json"))[0]["interdiction_gap"] == "0.5"
    try:
        bench.report(rows, "xml")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown report format accepted")
    print("✅ PASS")


def test_expand_cells():
    print("\n🧪 Bench cell expansion")
    cells = bench.expand_cells([{"family": "p1", "k": [1, 2], "seeds": 3}, {"family": "random", "k": 1, "seeds": [4, 5]}])
    assert [(c["family"], c["k"], c["seed"]) for c in cells] == [("p1", 1, 0), ("p1", 2, 0), ("random", 1, 4), ("random", 1, 5)]
    try:
        bench.expand_cells([{"k": [1]}])
    except ValueError:
        pass
    else:
        raise AssertionError("entry without family accepted")
    print("✅ PASS")


def test_bench_run_is_reproducible():
    print("\n🧪 Bench runs are reproducible")
    cells = bench.expand_cells([{"family": "random", "params": {"nodes": 5, "arcs": 9}, "k": [1], "seeds": 2}])
    rows, traces, calls = bench.run_bench(cells)
    again, _, _ = bench.run_bench(cells)
    assert len(rows) == 2
    assert bench.rows_equal(rows, again)
    assert set(traces["seed"]) <= {0, 1}
    summary = bench.summarize(rows)
    assert len(summary) == 1 and summary["seeds"][0] == 2
    with tempfile.TemporaryDirectory() as directory:
        bench.write_outputs(directory, rows, traces, calls)
        assert sorted(os.listdir(directory)) == ["cells.csv", "pricing_calls.csv", "report.csv", "trace.csv"]
    print("✅ PASS")


def test_p3_witness():
    print("\n🧪 Smallest P3 witness for k=2 separates the heuristic and the bound")
    witness = bench.find_p3_witness(k=2)
    assert witness is not None
    assert witness["params"] == {"M": 2, "m": 1, "n": 1}
    assert abs(witness["robust_value"] - 2 / 3) < 1e-6
    assert abs(witness["heuristic_value"] - 0.5) < 1e-6
    row, _, _ = bench.run_cell({"family": "p3", "params": witness["params"], "k": 2})
    assert row["status"] == "converged"
    assert abs(row["interdiction_bound"] - 1.0) < 1e-9
    assert abs(row["heuristic_gap"] - 0.25) < 1e-6
    assert abs(row["interdiction_gap"] - 0.5) < 1e-6
    print("✅ PASS")


def test_single_bundle_gaps_vanish():
    print("\n🧪 One bundle of parallel arcs: heuristic, optimum and bound coincide")
    for seed in range(3):
        row, _, _ = bench.run_cell({"family": "p2", "params": {"n": 2, "m0": 4}, "k": 2, "seed": seed})
        assert row["status"] == "converged"
        assert abs(row["heuristic_gap"]) < 1e-6, row
        assert abs(row["interdiction_gap"]) < 1e-6, row
    print("✅ PASS")


def test_default_suite_loads():
    print("\n🧪 Default bench suite")
    suite = bench.load_suite(os.path.join(os.path.dirname(os.path.abspath(__file__)), "bench-configs", "default.yaml"))
    cells = bench.expand_cells(suite["cells"])
    assert cells
    assert {c["family"] for c in cells} <= set(bench.family_names())
    try:
        bench.load_suite("/nonexistent/suite.yaml")
    except ValueError:
        pass
    else:
        raise AssertionError("missing suite accepted")
    print("✅ PASS")


def main():
    """Run all tests."""
    print("\n" + "=" * 50)
    print("🧪 CLI and bench - Test Suite")
    print("=" * 50)

    tests = [
        test_solve_and_oracle,
        test_heuristic_and_interdict,
        test_hybrid,
        test_gen,
        test_exit_codes,
        test_limits_parsing,
        test_report_formatting,
        test_expand_cells,
        test_bench_run_is_reproducible,
        test_p3_witness,
        test_single_bundle_gaps_vanish,
        test_default_suite_loads,
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
