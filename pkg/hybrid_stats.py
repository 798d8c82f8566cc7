"""
Scenario classes for the hybrid model and the statistics around them.

A partition groups scenarios into disjoint classes. Cardinality classes hold
every scenario of k interdictable arcs; two-tier classes split the
interdictable arcs into regular and exposed ones and hold the scenarios with j
regular and k exposed arcs. Each class is described by its pools, the same
(arc pool, count) pairs that interdiction.separate_pools understands.
"""

import itertools
import math
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import comb

import console
import seed as seed_helper
from config import config
from flows import enumerate_simple_paths
from interdiction import separate_pools
from lp_kernel import LinearProgram, solve_lp
from master import build_full_hybrid_model, check_weights
from network import EnumerationLimitError, FlowNetwork, PathFlow, Scenario


class ScenarioClass(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    pools: Tuple[Tuple[Tuple[int, ...], int], ...]

    def contains(self, scenario: Scenario) -> bool:
        arcs = set(scenario.arcs)
        covered = 0
        for pool, count in self.pools:
            inside = sum(1 for arc in pool if arc in arcs)
            if inside != count:
                return False
            covered += inside
        return covered == len(arcs)

    def size(self) -> int:
        total = 1
        for pool, count in self.pools:
            total *= int(comb(len(pool), count, exact=True))
        return total

    def enumerate(self, limit: Optional[int] = None) -> List[Scenario]:
        limit = config["SCENARIO_ENUMERATION_LIMIT"] if limit is None else limit
        if self.size() > limit:
            raise EnumerationLimitError(f"scenarios of class {self.name}", limit, self.size())
        parts = [itertools.combinations(pool, count) for pool, count in self.pools]
        return [Scenario.of(arc for part in choice for arc in part) for choice in itertools.product(*parts)]


class PartitionSpec(BaseModel):
    kind: Literal["cardinality", "two_tier"] = "cardinality"
    ks: List[int] = Field(default_factory=list)
    exposed: List[int] = Field(default_factory=list)
    pairs: List[Tuple[int, int]] = Field(default_factory=list)

    @classmethod
    def cardinality(cls, ks: Sequence[int]) -> "PartitionSpec":
        return cls(kind="cardinality", ks=list(ks))

    @classmethod
    def two_tier(cls, exposed: Sequence[int], pairs: Sequence[Tuple[int, int]]) -> "PartitionSpec":
        return cls(kind="two_tier", exposed=list(exposed), pairs=[tuple(p) for p in pairs])

    @classmethod
    def parse(cls, text: str) -> "PartitionSpec":
        """'1,2,3' for cardinality classes or 'exposed=4,5;pairs=1:0,0:1' for two-tier ones."""
        text = text.strip()
        if "pairs=" not in text:
            try:
                return cls.cardinality([int(token) for token in text.split(",") if token.strip()])
            except ValueError as e:
                raise ValueError(f"Invalid class list '{text}': {e}") from e
        fields = dict(part.split("=", 1) for part in text.split(";") if "=" in part)
        try:
            exposed = [int(token) for token in fields.get("exposed", "").split(",") if token.strip()]
            pairs = [tuple(int(v) for v in pair.split(":")) for pair in fields["pairs"].split(",") if pair.strip()]
        except (KeyError, ValueError) as e:
            raise ValueError(f"Invalid two-tier partition '{text}': {e}") from e
        return cls.two_tier(exposed, pairs)

    def largest(self) -> int:
        if self.kind == "cardinality":
            return max(self.ks, default=0)
        return max((j + k for j, k in self.pairs), default=0)

    def classes(self, net: FlowNetwork) -> List[ScenarioClass]:
        interdictable = net.interdictable_arcs()
        result = []
        if self.kind == "cardinality":
            if not self.ks:
                raise ValueError("A cardinality partition needs at least one class")
            for k in self.ks:
                if k < 0:
                    raise ValueError(f"Class cardinality must be nonnegative, got {k}")
                count = min(k, len(interdictable))
                result.append(ScenarioClass(name=f"k={k}", pools=((interdictable, count),)))
        else:
            if not self.pairs:
                raise ValueError("A two-tier partition needs at least one (j, k) pair")
            exposed = set(self.exposed)
            for arc in sorted(exposed):
                net.check_arc(arc)
                if net.arcs[arc].safe:
                    raise ValueError(f"Exposed arc {arc} is safe")
            regular = tuple(arc for arc in interdictable if arc not in exposed)
            exposed_pool = tuple(sorted(exposed))
            for j, k in self.pairs:
                if j < 0 or k < 0:
                    raise ValueError(f"Class counts must be nonnegative, got ({j}, {k})")
                pools = ((regular, min(j, len(regular))), (exposed_pool, min(k, len(exposed_pool))))
                result.append(ScenarioClass(name=f"j={j},k={k}", pools=pools))
        signatures = [tuple(count for _, count in c.pools) for c in result]
        if len(set(signatures)) != len(signatures):
            raise ValueError("Partition classes coincide on this network")
        return result

    def classify(self, net: FlowNetwork, scenario: Scenario, classes: Optional[List[ScenarioClass]] = None) -> int:
        net.check_scenario(scenario)
        classes = self.classes(net) if classes is None else classes
        for index, scenario_class in enumerate(classes):
            if scenario_class.contains(scenario):
                return index
        raise ValueError(f"Observed scenario {list(scenario.arcs)} belongs to no class")


class EmpiricalWeights(BaseModel):
    counts: List[int]
    N: int

    @property
    def q_hat(self) -> List[float]:
        return [count / self.N for count in self.counts]


def observe(net: FlowNetwork, spec: PartitionSpec, scenarios: Sequence[Scenario]) -> EmpiricalWeights:
    if not scenarios:
        raise ValueError("At least one observed scenario is required")
    classes = spec.classes(net)
    counts = [0] * len(classes)
    for scenario in scenarios:
        counts[spec.classify(net, scenario, classes)] += 1
    return EmpiricalWeights(counts=counts, N=len(scenarios))


def lambda_star(net: FlowNetwork, scenario_class: ScenarioClass) -> float:
    """Largest total capacity of a scenario in the class."""
    caps = net.capacities()
    total = 0.0
    for pool, count in scenario_class.pools:
        values = sorted((caps[arc] for arc in pool), reverse=True)
        total += float(sum(values[:count]))
    return total


def complexity_term(lambdas: Sequence[float], q_hat: Sequence[float], N: int) -> float:
    return 2.0 / math.sqrt(N) * sum(lam * math.sqrt(q) for lam, q in zip(lambdas, q_hat))


def confidence_term(lambdas: Sequence[float], N: int, delta: float) -> float:
    C = max(lambdas, default=0.0)
    return 2.0 * C * math.sqrt(8.0 * math.log(4.0 / delta) / N)


def bound_terms(
    class_values: Sequence[float], lambdas: Sequence[float], q_hat: Sequence[float], N: int, delta: float
) -> Dict[str, float]:
    """Empirical value, both correction terms and the resulting lower bound."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    empirical = float(sum(q * v for q, v in zip(q_hat, class_values)))
    complexity = complexity_term(lambdas, q_hat, N)
    confidence = confidence_term(lambdas, N, delta)
    return {
        "empirical": empirical,
        "complexity": complexity,
        "confidence": confidence,
        "bound": empirical - complexity - confidence,
    }


def class_values(net: FlowNetwork, x: PathFlow, classes: Sequence[ScenarioClass]) -> List[float]:
    """Worst surviving flow of x over each class."""
    total = x.total()
    return [total - separate_pools(net, x, c.pools)[1] for c in classes]


def generalization_terms(
    net: FlowNetwork, x: PathFlow, spec: PartitionSpec, weights: EmpiricalWeights, delta: float
) -> Dict[str, float]:
    classes = spec.classes(net)
    if len(weights.counts) != len(classes):
        raise ValueError(f"Weights cover {len(weights.counts)} classes, partition has {len(classes)}")
    lambdas = [lambda_star(net, c) for c in classes]
    return bound_terms(class_values(net, x, classes), lambdas, weights.q_hat, weights.N, delta)


def generalization_bound(
    net: FlowNetwork, x: PathFlow, spec: PartitionSpec, weights: EmpiricalWeights, delta: float
) -> float:
    """High-probability lower bound on the true class-weighted worst-case value of x."""
    return generalization_terms(net, x, spec, weights, delta)["bound"]


def _class_scenarios(net: FlowNetwork, spec: PartitionSpec, limit: Optional[int]) -> List[List[Scenario]]:
    limit = config["SCENARIO_ENUMERATION_LIMIT"] if limit is None else limit
    classes = spec.classes(net)
    total = sum(c.size() for c in classes)
    if total > limit:
        raise EnumerationLimitError("scenario universe", limit, total)
    return [c.enumerate(limit) for c in classes]


def minimax_check(
    net: FlowNetwork,
    spec: PartitionSpec,
    q: Sequence[float],
    tolerance: float = 1e-6,
    path_limit: Optional[int] = None,
    scenario_limit: Optional[int] = None,
) -> Tuple[float, float, bool]:
    """Compare max_x sum_k q_k min_{class k} val with min over Q matching q of max_x E_Q[val].

    The left side is the full hybrid LP. The right side is the LP
        min sum_e u_e y_e
        s.t. sum_{e in P} y_e - sum_{omega misses P} Q_omega >= 0   for every path P
             sum_{omega in class k} Q_omega = q_k,   y, Q >= 0.
    """
    class_scenarios = _class_scenarios(net, spec, scenario_limit)
    q = check_weights(q, len(class_scenarios))

    lp, paths = build_full_hybrid_model(net, class_scenarios, q, path_limit)
    if not paths:
        return 0.0, 0.0, True
    left = solve_lp(lp)
    if not left.optimal:
        raise RuntimeError(f"Full hybrid LP ended with status {left.status}")

    game = LinearProgram("min", "minimax_game")
    caps = net.capacities()
    y = [game.add_variable(float(caps[e]), name=f"y{e}") for e in range(net.arc_count)]
    omegas = []
    for k, scenarios in enumerate(class_scenarios):
        for omega in scenarios:
            omegas.append((k, omega, game.add_variable(0.0, name=f"Q{len(omegas)}")))
    for index, path in enumerate(paths):
        arcs = set(path.arcs)
        terms = [(y[e], 1.0) for e in path.arcs]
        terms += [(col, -1.0) for _, omega, col in omegas if not any(a in arcs for a in omega.arcs)]
        game.add_constraint(terms, ">=", 0.0, name=f"path{index}")
    for k in range(len(class_scenarios)):
        game.add_constraint([(col, 1.0) for j, _, col in omegas if j == k], "==", q[k], name=f"mass{k}")
    right = solve_lp(game)
    if not right.optimal:
        raise RuntimeError(f"Game LP ended with status {right.status}")

    lhs, rhs = float(left.objective), float(right.objective)
    return lhs, rhs, abs(lhs - rhs) <= tolerance


def stochastic_value(
    net: FlowNetwork, distribution: Sequence[Tuple[Scenario, float]], path_limit: Optional[int] = None
) -> Tuple[float, PathFlow]:
    """Optimal expected surviving flow under an explicit finite scenario distribution."""
    total = sum(p for _, p in distribution)
    if any(p < 0 for _, p in distribution) or abs(total - 1.0) > 1e-9:
        raise ValueError(f"Scenario probabilities must be nonnegative and sum to 1, got {total:.12g}")
    for omega, _ in distribution:
        net.check_scenario(omega)
    paths = enumerate_simple_paths(net, path_limit)
    if not paths:
        return 0.0, PathFlow()

    lp = LinearProgram("max", "stochastic")
    for path in paths:
        arcs = set(path.arcs)
        survive = sum(p for omega, p in distribution if not any(a in arcs for a in omega.arcs))
        lp.add_variable(survive)
    caps = net.capacities()
    for e in range(net.arc_count):
        users = [(i, 1.0) for i, path in enumerate(paths) if e in path.arcs]
        if users:
            lp.add_constraint(users, "<=", float(caps[e]))
    result = solve_lp(lp)
    if not result.optimal:
        raise RuntimeError(f"Stochastic LP ended with status {result.status}")
    x = PathFlow({path: result.x[i] for i, path in enumerate(paths)}, tol=config["FEASIBILITY_TOL"])
    return float(result.objective), x


def class_weights(
    net: FlowNetwork, spec: PartitionSpec, distribution: Sequence[Tuple[Scenario, float]]
) -> List[float]:
    """True class masses Q(class k) of a scenario distribution."""
    classes = spec.classes(net)
    weights = [0.0] * len(classes)
    for omega, p in distribution:
        weights[spec.classify(net, omega, classes)] += p
    return weights


def sample_scenarios(
    distribution: Sequence[Tuple[Scenario, float]], N: int, rng: np.random.Generator
) -> List[Scenario]:
    probabilities = np.array([p for _, p in distribution], dtype=float)
    picks = rng.choice(len(distribution), size=N, p=probabilities / probabilities.sum())
    return [distribution[i][0] for i in picks]


def bound_coverage(
    net: FlowNetwork,
    spec: PartitionSpec,
    distribution: Sequence[Tuple[Scenario, float]],
    N: int,
    delta: float,
    trials: int,
    seed: int,
    x: Optional[PathFlow] = None,
    data_dependent: bool = False,
) -> Dict[str, float]:
    """Fraction of sampled data sets for which the true weighted value is at least the bound.

    With a fixed x (default: the stochastic optimum) the flow is chosen before
    sampling; with data_dependent the flow is re-optimized on every sample.
    """
    classes = spec.classes(net)
    true_q = class_weights(net, spec, distribution)
    lambdas = [lambda_star(net, c) for c in classes]
    rng = seed_helper.stream(seed, "observations")

    fixed_values = None
    if not data_dependent:
        if x is None:
            _, x = stochastic_value(net, distribution)
        fixed_values = class_values(net, x, classes)

    held = 0
    for _ in range(trials):
        weights = observe(net, spec, sample_scenarios(distribution, N, rng))
        if data_dependent:
            from driver import SolverConfig, solve_hybrid

            cfg = SolverConfig(k=max(spec.largest(), 1))
            trial_x, _, _ = solve_hybrid(net, spec, weights.q_hat, cfg)
            values = class_values(net, trial_x, classes)
        else:
            values = fixed_values
        truth = sum(q * v for q, v in zip(true_q, values))
        bound = bound_terms(values, lambdas, weights.q_hat, weights.N, delta)["bound"]
        if truth >= bound - 1e-12:
            held += 1
    coverage = held / trials if trials else 1.0
    console.debug(f"Bound held in {held} of {trials} trials")
    return {"trials": trials, "held": held, "coverage": coverage}
