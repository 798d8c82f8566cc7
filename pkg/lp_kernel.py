"""
LP and MILP engine used by every other solver module.

solve_lp is a two-phase primal simplex with bounded variables on a dense
tableau. Columns are shifted/flipped/split so that every working variable lives
in [0, u], rows and columns are equilibrated, and the initial basis is the
identity made of slacks and artificials. Pricing is Dantzig's rule, switching to
Bland's rule after a run of degenerate pivots.

solve_mip is best-bound branch and bound over a chosen set of columns.
"""

import heapq
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import sparse

import console
from config import config

PIVOT_TOL = 1e-9
OPTIMALITY_TOL = 1e-9
PHASE_ONE_TOL = 1e-7
REFRESH_INTERVAL = 100
BLAND_AFTER = 50
CONDITION_WARNING = 1e8
RELATIONS = ("<=", "==", ">=")


class SolveResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: str
    x: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None
    objective: Optional[float] = None
    bound: Optional[float] = None
    gap: Optional[float] = None
    nodes: int = 0
    branches: int = 0
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class LinearProgram:
    """Objective, sparse constraint triplets, row relations and column bounds."""

    def __init__(self, sense: str = "max", name: str = "lp"):
        if sense not in ("max", "min"):
            raise ValueError(f"Unknown objective sense: {sense}")
        self.sense = sense
        self.name = name
        self.c: List[float] = []
        self.lb: List[float] = []
        self.ub: List[float] = []
        self.integer: List[bool] = []
        self.col_names: List[str] = []
        self.relations: List[str] = []
        self.rhs: List[float] = []
        self.row_names: List[str] = []
        self._rows: List[int] = []
        self._cols: List[int] = []
        self._vals: List[float] = []
        self._dense: Optional[np.ndarray] = None
        self._warned = False

    @property
    def num_cols(self) -> int:
        return len(self.c)

    @property
    def num_rows(self) -> int:
        return len(self.rhs)

    def add_variable(
        self,
        cost: float = 0.0,
        lb: float = 0.0,
        ub: float = math.inf,
        integer: bool = False,
        name: Optional[str] = None,
    ) -> int:
        if not math.isfinite(cost):
            raise ValueError(f"Objective coefficient must be finite, got {cost}")
        if lb > ub:
            raise ValueError(f"Variable {name or self.num_cols} has lb {lb} > ub {ub}")
        self.c.append(float(cost))
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.integer.append(bool(integer))
        self.col_names.append(name or f"x{self.num_cols - 1}")
        self._dense = None
        return self.num_cols - 1

    def add_constraint(
        self,
        coefficients: Union[Dict[int, float], Iterable[Tuple[int, float]]],
        relation: str,
        rhs: float,
        name: Optional[str] = None,
    ) -> int:
        if relation not in RELATIONS:
            raise ValueError(f"Unknown relation '{relation}'. Choose from {', '.join(RELATIONS)}")
        if not math.isfinite(rhs):
            raise ValueError(f"Right-hand side must be finite, got {rhs}")
        items = coefficients.items() if isinstance(coefficients, dict) else coefficients
        row = self.num_rows
        for col, value in items:
            if not 0 <= col < self.num_cols:
                raise ValueError(f"Constraint {name or row} references unknown column {col}")
            if not math.isfinite(value):
                raise ValueError(f"Constraint {name or row} has a non-finite coefficient")
            if value != 0.0:
                self._rows.append(row)
                self._cols.append(col)
                self._vals.append(float(value))
        self.relations.append(relation)
        self.rhs.append(float(rhs))
        self.row_names.append(name or f"r{row}")
        self._dense = None
        return row

    def matrix(self) -> sparse.csr_matrix:
        # Duplicate (row, col) entries are summed by the COO -> CSR conversion.
        return sparse.coo_matrix(
            (self._vals, (self._rows, self._cols)), shape=(self.num_rows, self.num_cols)
        ).tocsr()

    def dense(self) -> np.ndarray:
        if self._dense is None:
            self._dense = self.matrix().toarray()
        return self._dense

    def to_text(self) -> str:
        """Plain-text dump for inspection."""

        def terms(pairs):
            pairs = list(pairs)
            if not pairs:
                return "0"
            return " + ".join(f"{value:g} {self.col_names[col]}" for col, value in pairs)

        lines = [f"LP {self.name} {self.sense}"]
        lines.append("obj: " + terms((j, v) for j, v in enumerate(self.c) if v != 0.0))
        A = self.matrix()
        for i in range(self.num_rows):
            start, end = A.indptr[i], A.indptr[i + 1]
            pairs = zip(A.indices[start:end], A.data[start:end])
            lines.append(f"{self.row_names[i]}: {terms(pairs)} {self.relations[i]} {self.rhs[i]:g}")
        for j in range(self.num_cols):
            lines.append(f"bound: {self.lb[j]:g} <= {self.col_names[j]} <= {self.ub[j]:g}")
        integer = [self.col_names[j] for j in range(self.num_cols) if self.integer[j]]
        if integer:
            lines.append("int: " + " ".join(integer))
        return "\n".join(lines) + "\n"


class _Tableau:
    """Dense tableau B^-1 [A] with basic values and nonbasic-at-upper flags."""

    def __init__(self, M: np.ndarray, b: np.ndarray, ub: np.ndarray, basis: List[int]):
        self.M = M
        self.b = b
        self.ub = ub
        self.m, self.n = M.shape
        self.basis = list(basis)
        self.at_upper = np.zeros(self.n, dtype=bool)
        self.T = M.copy()
        self.xB = b.copy()
        self.iterations = 0

    def refresh(self):
        if self.m == 0:
            return
        inverse = np.linalg.inv(self.M[:, self.basis])
        self.T = inverse @ self.M
        upper = np.flatnonzero(self.at_upper)
        rhs = self.b - self.M[:, upper] @ self.ub[upper] if upper.size else self.b
        self.xB = inverse @ rhs

    def run(self, cost: np.ndarray, limit: int) -> str:
        is_basic = np.zeros(self.n, dtype=bool)
        is_basic[self.basis] = True
        reduced = cost - cost[self.basis] @ self.T
        bland = False
        degenerate = 0
        since_refresh = 0

        while True:
            if since_refresh >= REFRESH_INTERVAL:
                self.refresh()
                reduced = cost - cost[self.basis] @ self.T
                since_refresh = 0
            reduced[is_basic] = 0.0
            up = ~self.at_upper & ~is_basic & (self.ub > 0) & (reduced > OPTIMALITY_TOL)
            down = self.at_upper & ~is_basic & (reduced < -OPTIMALITY_TOL)
            eligible = up | down
            if not eligible.any():
                return "optimal"
            if self.iterations >= limit:
                return "iteration_limit"
            self.iterations += 1

            if bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                j = int(np.argmax(np.where(eligible, np.abs(reduced), -1.0)))
            direction = 1.0 if up[j] else -1.0
            alpha = self.T[:, j]
            delta = -direction * alpha

            steps = np.full(self.m, math.inf)
            ub_basic = self.ub[self.basis]
            falling = delta < -PIVOT_TOL
            steps[falling] = np.maximum(self.xB[falling], 0.0) / -delta[falling]
            rising = (delta > PIVOT_TOL) & np.isfinite(ub_basic)
            steps[rising] = np.maximum(ub_basic[rising] - self.xB[rising], 0.0) / delta[rising]
            step = steps.min() if self.m else math.inf
            span = self.ub[j]

            if span <= step:
                if not math.isfinite(span):
                    return "unbounded"
                self.xB += delta * span
                self.at_upper[j] = not self.at_upper[j]
                degenerate = 0
                continue

            ties = np.flatnonzero(steps <= step + 1e-12)
            if bland:
                i = int(min(ties, key=lambda row: self.basis[row]))
            else:
                i = int(max(ties, key=lambda row: (abs(alpha[row]), -self.basis[row])))

            leaving = self.basis[i]
            self.xB += delta * step
            self.xB[i] = step if direction > 0 else span - step
            self.at_upper[leaving] = bool(rising[i])
            self.at_upper[j] = False

            pivot_row = self.T[i] / alpha[i]
            self.T -= np.outer(alpha, pivot_row)
            self.T[i] = pivot_row
            reduced = reduced - reduced[j] * pivot_row
            self.basis[i] = j
            is_basic[j] = True
            is_basic[leaving] = False

            since_refresh += 1
            degenerate = degenerate + 1 if step <= 1e-12 else 0
            if degenerate > BLAND_AFTER and not bland:
                console.debug(f"Switching to Bland's rule after {degenerate} degenerate pivots")
                bland = True

    def values(self) -> np.ndarray:
        x = np.where(self.at_upper, self.ub, 0.0)
        x[self.basis] = self.xB
        return np.maximum(x, 0.0)


def _warn_condition(lp: LinearProgram, A: np.ndarray):
    if lp._warned:
        return
    magnitudes = np.abs(A[A != 0.0])
    if magnitudes.size and magnitudes.max() / magnitudes.min() > CONDITION_WARNING:
        console.warn(
            f"LP {lp.name}: coefficient range {magnitudes.min():.3g}..{magnitudes.max():.3g} is badly scaled"
        )
        lp._warned = True


def _solve(
    lp: LinearProgram,
    lb: Sequence[float],
    ub: Sequence[float],
    iteration_limit: Optional[int] = None,
) -> SolveResult:
    A = lp.dense()
    m, n = A.shape
    _warn_condition(lp, A)
    sign = 1.0 if lp.sense == "max" else -1.0
    c = sign * np.asarray(lp.c, dtype=float)
    b = np.asarray(lp.rhs, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)

    # Working columns: x_j = offset_j + sum(sign * w) with every w in [0, span].
    origin, signs, spans = [], [], []
    offset = np.zeros(n)
    for j in range(n):
        low, high = lb[j], ub[j]
        if low > high + 1e-12:
            return SolveResult(status="infeasible")
        if math.isfinite(low):
            offset[j] = low
            origin.append(j)
            signs.append(1.0)
            spans.append(max(high - low, 0.0))
        elif math.isfinite(high):
            offset[j] = high
            origin.append(j)
            signs.append(-1.0)
            spans.append(math.inf)
        else:
            origin.extend((j, j))
            signs.extend((1.0, -1.0))
            spans.extend((math.inf, math.inf))
    origin = np.array(origin, dtype=int)
    signs = np.array(signs)
    spans = np.array(spans)

    W = A[:, origin] * signs if origin.size else np.zeros((m, 0))
    cw = c[origin] * signs if origin.size else np.zeros(0)
    bw = b - A @ offset if n else b.copy()

    column_max = np.abs(W).max(axis=0) if m and W.shape[1] else np.ones(W.shape[1])
    column_scale = np.where(column_max > 0, 1.0 / np.where(column_max > 0, column_max, 1.0), 1.0)
    W = W * column_scale
    cw = cw * column_scale
    spans = spans / column_scale

    row_max = np.abs(W).max(axis=1) if W.shape[1] else np.zeros(m)
    row_scale = np.where(row_max > 0, 1.0 / np.where(row_max > 0, row_max, 1.0), 1.0)
    W = W * row_scale[:, None]
    bw = bw * row_scale

    slack_sign = np.array([{"<=": 1.0, "==": 0.0, ">=": -1.0}[r] for r in lp.relations])
    flip = np.where(bw < 0, -1.0, 1.0)
    W = W * flip[:, None]
    bw = bw * flip
    slack_sign = slack_sign * flip

    slack_rows = np.flatnonzero(slack_sign != 0.0)
    artificial_rows = np.flatnonzero(slack_sign <= 0.0)
    width = W.shape[1]
    slack_start = width
    artificial_start = width + slack_rows.size
    total = artificial_start + artificial_rows.size

    M = np.zeros((m, total))
    M[:, :width] = W
    M[slack_rows, slack_start + np.arange(slack_rows.size)] = slack_sign[slack_rows]
    M[artificial_rows, artificial_start + np.arange(artificial_rows.size)] = 1.0

    basis = [0] * m
    for offset_index, row in enumerate(slack_rows):
        if slack_sign[row] > 0:
            basis[row] = slack_start + offset_index
    for offset_index, row in enumerate(artificial_rows):
        basis[row] = artificial_start + offset_index

    bounds = np.concatenate([spans, np.full(total - width, math.inf)])
    cost = np.concatenate([cw, np.zeros(total - width)])
    limit = 50 * (m + total) + 1000 if iteration_limit is None else iteration_limit

    tableau = _Tableau(M, bw, bounds, basis)
    initial = list(basis)

    if artificial_rows.size:
        phase_one = np.zeros(total)
        phase_one[artificial_start:] = -1.0
        status = tableau.run(phase_one, limit)
        if status == "iteration_limit":
            return SolveResult(status=status, iterations=tableau.iterations)
        tableau.refresh()
        infeasibility = tableau.values()[artificial_start:].sum()
        if infeasibility > PHASE_ONE_TOL:
            return SolveResult(status="infeasible", iterations=tableau.iterations)
        tableau.ub[artificial_start:] = 0.0

    status = tableau.run(cost, limit)
    if status != "optimal":
        return SolveResult(status=status, iterations=tableau.iterations)
    tableau.refresh()

    w = tableau.values()[:width] * column_scale
    x = offset.copy()
    np.add.at(x, origin, signs * w)

    inverse = tableau.T[:, initial] if m else np.zeros((0, 0))
    duals = (cost[tableau.basis] @ inverse) * flip * row_scale * sign if m else np.zeros(0)

    objective = float(np.dot(lp.c, x))
    return SolveResult(
        status="optimal",
        x=x,
        duals=duals,
        objective=objective,
        bound=objective,
        gap=0.0,
        iterations=tableau.iterations,
    )


def solve_lp(lp: LinearProgram, iteration_limit: Optional[int] = None) -> SolveResult:
    """Optimal basic solution with row duals; integrality flags are ignored."""
    return _solve(lp, lp.lb, lp.ub, iteration_limit)


def _branching_column(x: np.ndarray, columns: Sequence[int], tol: float) -> Optional[int]:
    best, best_distance = None, tol
    for j in columns:
        fraction = x[j] - math.floor(x[j])
        distance = min(fraction, 1.0 - fraction)
        if distance > best_distance:
            best, best_distance = j, distance
    return best


def solve_mip(
    lp: LinearProgram,
    branch_set: Optional[Iterable[int]] = None,
    node_limit: Optional[int] = None,
    incumbent: Optional[Sequence[float]] = None,
    node_iteration_limit: Optional[int] = None,
    gap_abs: float = 1e-9,
    gap_rel: float = 1e-6,
    int_tol: float = 1e-6,
) -> SolveResult:
    """Best-bound branch and bound.

    Only the columns of branch_set (default: the integer columns) are branched
    on, most fractional first with ties to the lowest index. A node whose
    solution is integral on branch_set is a leaf. `incumbent` is an optional
    feasible starting point. A node LP that runs out of iterations
    (`node_iteration_limit` caps every node below the root) is dropped; the
    result then has status "node_limit" and its bound keeps the parent's value.
    """
    node_limit = config["NODE_LIMIT"] if node_limit is None else node_limit
    if branch_set is None:
        columns = [j for j in range(lp.num_cols) if lp.integer[j]]
    else:
        columns = sorted(set(branch_set))
    sign = 1.0 if lp.sense == "max" else -1.0

    lower = np.asarray(lp.lb, dtype=float).copy()
    upper = np.asarray(lp.ub, dtype=float).copy()
    for j in columns:
        if math.isfinite(lower[j]):
            lower[j] = math.ceil(lower[j] - int_tol)
        if math.isfinite(upper[j]):
            upper[j] = math.floor(upper[j] + int_tol)

    best_x = None
    best_score = -math.inf
    if incumbent is not None:
        best_x = np.asarray(incumbent, dtype=float)
        best_score = sign * float(np.dot(lp.c, best_x))

    def tolerance() -> float:
        return max(gap_abs, gap_rel * abs(best_score)) if best_x is not None else 0.0

    root = _solve(lp, lower, upper)
    nodes, branches, iterations = 1, 0, root.iterations
    if not root.optimal:
        return SolveResult(status=root.status, nodes=nodes, iterations=iterations)

    heap = [(-sign * root.objective, 0, lower, upper, root)]
    counter = 1
    status = "optimal"
    dropped_score = -math.inf
    while heap:
        bound_score = -heap[0][0]
        if best_x is not None and bound_score - best_score <= tolerance():
            break
        _, _, node_lower, node_upper, node = heapq.heappop(heap)
        j = _branching_column(node.x, columns, int_tol)
        if j is None:
            if sign * node.objective > best_score:
                best_score = sign * node.objective
                best_x = node.x
            continue
        if nodes >= node_limit:
            heapq.heappush(heap, (-sign * node.objective, counter, node_lower, node_upper, node))
            status = "node_limit"
            break
        branches += 1
        value = node.x[j]
        down_upper = node_upper.copy()
        down_upper[j] = math.floor(value)
        up_lower = node_lower.copy()
        up_lower[j] = math.ceil(value)
        for child_lower, child_upper in ((node_lower, down_upper), (up_lower, node_upper)):
            child = _solve(lp, child_lower, child_upper, node_iteration_limit)
            nodes += 1
            iterations += child.iterations
            if child.status == "iteration_limit":
                console.warn(f"MIP {lp.name}: node LP hit the iteration limit and was dropped")
                dropped_score = max(dropped_score, sign * node.objective)
                status = "node_limit"
                continue
            if not child.optimal:
                continue
            if best_x is None or sign * child.objective > best_score + tolerance():
                heapq.heappush(heap, (-sign * child.objective, counter, child_lower, child_upper, child))
                counter += 1

    bound_score = max(best_score, dropped_score)
    if heap:
        bound_score = max(bound_score, -heap[0][0])
    if best_x is None:
        return SolveResult(
            status="infeasible" if status == "optimal" else status,
            bound=sign * bound_score if math.isfinite(bound_score) else None,
            nodes=nodes,
            branches=branches,
            iterations=iterations,
        )

    x = np.array(best_x, dtype=float)
    for j in columns:
        nearest = round(x[j])
        if abs(x[j] - nearest) <= int_tol:
            x[j] = nearest
    objective = sign * best_score
    bound = sign * bound_score
    return SolveResult(
        status=status,
        x=x,
        objective=objective,
        bound=bound,
        gap=abs(bound - objective),
        nodes=nodes,
        branches=branches,
        iterations=iterations,
    )
