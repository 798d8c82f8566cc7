"""
Core types of the robust flow solver.

Arc indices are the identity of an arc everywhere: scenarios, dual prices,
arc flow vectors and the DIMACS/JSON files all refer to arcs by their position
in FlowNetwork.arcs. Parallel arcs are allowed.
"""

import math
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator


class EnumerationLimitError(RuntimeError):
    """Raised when an exhaustive enumeration would exceed its limit."""

    def __init__(self, what: str, limit: int, count: Optional[int] = None):
        self.what = what
        self.limit = limit
        self.count = count
        if count is None:
            message = f"Enumerating {what} exceeds the limit of {limit}"
        else:
            message = f"Enumerating {what} needs {count} items, limit is {limit}"
        super().__init__(message)


class Arc(BaseModel):
    model_config = ConfigDict(frozen=True)

    tail: int = Field(ge=0)
    head: int = Field(ge=0)
    capacity: float = Field(ge=0)
    safe: bool = False

    @field_validator("capacity")
    @classmethod
    def finite_capacity(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"Arc capacity must be finite, got {value}")
        return value


class FlowNetwork(BaseModel):
    model_config = ConfigDict(frozen=True)

    node_count: int = Field(gt=0)
    arcs: Tuple[Arc, ...]
    source: int = Field(ge=0)
    sink: int = Field(ge=0)

    _out: Optional[List[List[int]]] = PrivateAttr(default=None)
    _in: Optional[List[List[int]]] = PrivateAttr(default=None)
    _capacities: Optional[np.ndarray] = PrivateAttr(default=None)
    _interdictable: Optional[Tuple[int, ...]] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def check_structure(self):
        if self.source == self.sink:
            raise ValueError("Source and sink must differ")
        for node in (self.source, self.sink):
            if node >= self.node_count:
                raise ValueError(f"Terminal {node} is not a node of a {self.node_count}-node network")
        for index, arc in enumerate(self.arcs):
            if arc.tail >= self.node_count or arc.head >= self.node_count:
                raise ValueError(
                    f"Arc {index} ({arc.tail}->{arc.head}) references a node outside 0..{self.node_count - 1}"
                )
        return self

    # Equality ignores the lazily built adjacency caches.
    def __eq__(self, other) -> bool:
        if not isinstance(other, FlowNetwork):
            return NotImplemented
        return (self.node_count, self.arcs, self.source, self.sink) == (
            other.node_count,
            other.arcs,
            other.source,
            other.sink,
        )

    def __hash__(self) -> int:
        return hash((self.node_count, self.arcs, self.source, self.sink))

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def out_arcs(self, node: int) -> List[int]:
        if self._out is None:
            self._build_adjacency()
        return self._out[node]

    def in_arcs(self, node: int) -> List[int]:
        if self._in is None:
            self._build_adjacency()
        return self._in[node]

    def _build_adjacency(self):
        out_lists = [[] for _ in range(self.node_count)]
        in_lists = [[] for _ in range(self.node_count)]
        for index, arc in enumerate(self.arcs):
            out_lists[arc.tail].append(index)
            in_lists[arc.head].append(index)
        self._out = out_lists
        self._in = in_lists

    def capacities(self) -> np.ndarray:
        if self._capacities is None:
            self._capacities = np.array([arc.capacity for arc in self.arcs], dtype=float)
        return self._capacities

    def interdictable_arcs(self) -> Tuple[int, ...]:
        if self._interdictable is None:
            self._interdictable = tuple(i for i, arc in enumerate(self.arcs) if not arc.safe)
        return self._interdictable

    def check_arc(self, index: int):
        if not 0 <= index < self.arc_count:
            raise ValueError(f"Arc index {index} is out of range 0..{self.arc_count - 1}")

    def check_scenario(self, scenario: "Scenario"):
        for index in scenario.arcs:
            self.check_arc(index)
            if self.arcs[index].safe:
                raise ValueError(f"Scenario {list(scenario.arcs)} contains safe arc {index}")

    def check_path(self, path: "Path"):
        if not path.arcs:
            raise ValueError("A path needs at least one arc")
        node = self.source
        visited = {node}
        for index in path.arcs:
            self.check_arc(index)
            arc = self.arcs[index]
            if arc.tail != node:
                raise ValueError(f"Path {list(path.arcs)} is broken at arc {index}")
            node = arc.head
            if node in visited:
                raise ValueError(f"Path {list(path.arcs)} revisits node {node}")
            visited.add(node)
        if node != self.sink:
            raise ValueError(f"Path {list(path.arcs)} does not end at the sink")


class Path(BaseModel):
    """A simple s-t path given by its arc indices in travel order."""

    model_config = ConfigDict(frozen=True)

    arcs: Tuple[int, ...]

    def __lt__(self, other: "Path") -> bool:
        return self.arcs < other.arcs

    def hits(self, arc_set) -> bool:
        return any(index in arc_set for index in self.arcs)


class Scenario(BaseModel):
    """A set of interdicted arcs, stored sorted."""

    model_config = ConfigDict(frozen=True)

    arcs: Tuple[int, ...]

    @field_validator("arcs")
    @classmethod
    def sorted_unique(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(set(value)) != len(value):
            raise ValueError(f"Scenario arcs must be unique, got {list(value)}")
        return tuple(sorted(value))

    @classmethod
    def of(cls, arcs: Iterable[int]) -> "Scenario":
        return cls(arcs=tuple(arcs))

    def __lt__(self, other: "Scenario") -> bool:
        return self.arcs < other.arcs

    def __len__(self) -> int:
        return len(self.arcs)


class PathFlow:
    """Sparse path flow x: rates per path, zero rates dropped."""

    def __init__(self, rates: Optional[Dict[Path, float]] = None, tol: float = 0.0):
        self.rates: Dict[Path, float] = {}
        for path, rate in (rates or {}).items():
            rate = float(rate)
            if rate < -1e-9:
                raise ValueError(f"Negative rate {rate} on path {list(path.arcs)}")
            if rate > tol:
                self.rates[path] = self.rates.get(path, 0.0) + rate

    def __len__(self) -> int:
        return len(self.rates)

    def __repr__(self) -> str:
        entries = ", ".join(f"{list(p.arcs)}: {r:g}" for p, r in sorted(self.rates.items()))
        return f"PathFlow({{{entries}}})"

    def items(self):
        return sorted(self.rates.items())

    def paths(self) -> List[Path]:
        return sorted(self.rates)

    def rate(self, path: Path) -> float:
        return self.rates.get(path, 0.0)

    def total(self) -> float:
        return float(sum(self.rates.values()))

    def arc_loads(self, net: FlowNetwork) -> np.ndarray:
        loads = np.zeros(net.arc_count)
        for path, rate in self.rates.items():
            for index in path.arcs:
                loads[index] += rate
        return loads

    def max_interdictable_load(self, net: FlowNetwork) -> float:
        interdictable = list(net.interdictable_arcs())
        if not interdictable:
            return 0.0
        return float(self.arc_loads(net)[interdictable].max())

    def is_feasible(self, net: FlowNetwork, tol: float = 1e-9) -> bool:
        return bool(np.all(self.arc_loads(net) <= net.capacities() + tol))
