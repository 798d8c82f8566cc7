"""
Reading and writing flow networks.

Extended DIMACS max-flow format (node ids are 1-based in the file):

    c <comment>
    p max <nodes> <arcs>
    n <id> s
    n <id> t
    a <tail> <head> <capacity> [<safe>]

<safe> is 0 (interdictable, the default) or 1. The order of the `a` lines is the
arc index order. The JSON format is the FlowNetwork model dumped with explicit
field names.
"""

import json
import os
from typing import List, Optional

from pydantic import ValidationError

from network import Arc, FlowNetwork, Scenario

FORMATS = ["dimacs", "json"]


def guess_format(path: str) -> str:
    return "json" if os.path.splitext(path)[1].lower() == ".json" else "dimacs"


def format_capacity(capacity: float) -> str:
    if float(capacity).is_integer() and abs(capacity) < 1e15:
        return str(int(capacity))
    return repr(float(capacity))


def parse_dimacs(text: str) -> FlowNetwork:
    node_count = None
    declared_arcs = None
    source = None
    sink = None
    arcs = []

    for line_number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "p":
                if len(parts) != 4 or parts[1] != "max":
                    raise ValueError("expected 'p max <nodes> <arcs>'")
                node_count = int(parts[2])
                declared_arcs = int(parts[3])
            elif kind == "n":
                if len(parts) != 3 or parts[2] not in ("s", "t"):
                    raise ValueError("expected 'n <id> s' or 'n <id> t'")
                if parts[2] == "s":
                    source = int(parts[1]) - 1
                else:
                    sink = int(parts[1]) - 1
            elif kind == "a":
                if len(parts) not in (4, 5):
                    raise ValueError("expected 'a <tail> <head> <capacity> [<safe>]'")
                safe = False
                if len(parts) == 5:
                    if parts[4] not in ("0", "1"):
                        raise ValueError(f"safe flag must be 0 or 1, got '{parts[4]}'")
                    safe = parts[4] == "1"
                arcs.append(
                    Arc(
                        tail=int(parts[1]) - 1,
                        head=int(parts[2]) - 1,
                        capacity=float(parts[3]),
                        safe=safe,
                    )
                )
            else:
                raise ValueError(f"unknown line type '{kind}'")
        except (ValueError, ValidationError) as e:
            raise ValueError(f"DIMACS line {line_number}: {e}") from e

    if node_count is None:
        raise ValueError("DIMACS input has no 'p max' line")
    if source is None or sink is None:
        raise ValueError("DIMACS input must declare both a source and a sink")
    if declared_arcs != len(arcs):
        raise ValueError(f"DIMACS problem line declares {declared_arcs} arcs, found {len(arcs)}")

    try:
        return FlowNetwork(node_count=node_count, arcs=tuple(arcs), source=source, sink=sink)
    except ValidationError as e:
        raise ValueError(f"Invalid DIMACS network: {e}") from e


def format_dimacs(net: FlowNetwork, comment: Optional[str] = None) -> str:
    lines = []
    if comment:
        for comment_line in comment.splitlines():
            lines.append(f"c {comment_line}")
    lines.append(f"p max {net.node_count} {net.arc_count}")
    lines.append(f"n {net.source + 1} s")
    lines.append(f"n {net.sink + 1} t")
    for arc in net.arcs:
        lines.append(
            f"a {arc.tail + 1} {arc.head + 1} {format_capacity(arc.capacity)} {1 if arc.safe else 0}"
        )
    return "\n".join(lines) + "\n"


def parse_json(text: str) -> FlowNetwork:
    try:
        return FlowNetwork.model_validate_json(text)
    except ValidationError as e:
        raise ValueError(f"Invalid JSON network: {e}") from e


def format_json(net: FlowNetwork) -> str:
    return net.model_dump_json(indent=2) + "\n"


def parse_network(text: str, fmt: str) -> FlowNetwork:
    if fmt == "dimacs":
        return parse_dimacs(text)
    if fmt == "json":
        return parse_json(text)
    raise ValueError(f"Unsupported format: {fmt}. Choose from {', '.join(FORMATS)}")


def format_network(net: FlowNetwork, fmt: str, comment: Optional[str] = None) -> str:
    if fmt == "dimacs":
        return format_dimacs(net, comment)
    if fmt == "json":
        return format_json(net)
    raise ValueError(f"Unsupported format: {fmt}. Choose from {', '.join(FORMATS)}")


def read_network(path: str, fmt: Optional[str] = None) -> FlowNetwork:
    fmt = fmt or guess_format(path)
    with open(path, "r") as f:
        return parse_network(f.read(), fmt)


def write_network(net: FlowNetwork, path: str, fmt: Optional[str] = None, comment: Optional[str] = None):
    fmt = fmt or guess_format(path)
    with open(path, "w") as f:
        f.write(format_network(net, fmt, comment))


def parse_observations(text: str, fmt: str = "lines") -> List[Scenario]:
    """Observed scenarios: one per line as space-separated arc indices ('-' is
    the empty scenario), or a JSON list of index lists."""
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid observations JSON: {e}") from e
        if not isinstance(data, list):
            raise ValueError("Observations JSON must be a list of arc index lists")
        return [Scenario.of(int(index) for index in item) for item in data]

    scenarios = []
    for line_number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "-":
            scenarios.append(Scenario.of(()))
            continue
        try:
            scenarios.append(Scenario.of(int(token) for token in line.split()))
        except (ValueError, ValidationError) as e:
            raise ValueError(f"Observation line {line_number}: {e}") from e
    return scenarios


def read_observations(path: str) -> List[Scenario]:
    fmt = "json" if path.lower().endswith(".json") else "lines"
    with open(path, "r") as f:
        return parse_observations(f.read(), fmt)
