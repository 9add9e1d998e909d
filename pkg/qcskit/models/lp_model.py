from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import Optional, Sequence

import numpy as np

from qcskit.utils.logger import configure_logger


logger = logging.getLogger(__name__)
configure_logger(logger)


MAX_VARIABLES = 4096
MAX_SLABS = 16384
ITERATION_CAP = 1_000_000
PIVOT_TOL = 1e-9
FEASIBILITY_TOL = 1e-8


class LpCapExceeded(RuntimeError):
    """Raised when the simplex exceeds its pivot cap. This is an engine bug, not an answer."""


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True, eq=False)
class Slab:
    """The two-sided constraint lower <= vector . x <= upper (either bound may be infinite)."""
    vector: np.ndarray
    lower: float
    upper: float


@dataclass(eq=False)
class LpProblem:
    """minimize objective . x over free x subject to slabs and equalities.

    Attributes:
        objective (np.ndarray): The cost vector c.
        slabs (list[Slab]): Two-sided constraints; tuples (vector, lower, upper) are accepted.
        equalities (list[tuple[np.ndarray, float]]): Constraints vector . x = value.

    """
    objective: np.ndarray
    slabs: list = field(default_factory=list)
    equalities: list = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        nvars = self.objective.size
        if nvars < 1:
            logger.error("LP must have at least one variable")
            raise ValueError("LP must have at least one variable")
        if nvars > MAX_VARIABLES:
            logger.error(f"LP has {nvars} variables, limit is {MAX_VARIABLES}")
            raise ValueError(f"LP has {nvars} variables; the limit is {MAX_VARIABLES}")
        if len(self.slabs) > MAX_SLABS:
            logger.error(f"LP has {len(self.slabs)} slabs, limit is {MAX_SLABS}")
            raise ValueError(f"LP has {len(self.slabs)} slabs; the limit is {MAX_SLABS}")
        if not np.all(np.isfinite(self.objective)):
            logger.error("LP objective contains NaN or infinity")
            raise ValueError("LP objective contains NaN or infinity")

        slabs = []
        for slab in self.slabs:
            if not isinstance(slab, Slab):
                slab = Slab(*slab)
            vector = np.asarray(slab.vector, dtype=float).reshape(-1)
            lower, upper = float(slab.lower), float(slab.upper)
            if vector.size != nvars:
                raise ValueError(f"Slab vector has length {vector.size}, expected {nvars}")
            if not np.all(np.isfinite(vector)) or math.isnan(lower) or math.isnan(upper):
                logger.error("LP slab contains NaN or infinity")
                raise ValueError("LP slab contains NaN or infinity in its vector or a NaN bound")
            if lower > upper or lower == math.inf or upper == -math.inf:
                logger.error(f"Invalid slab bounds [{lower}, {upper}]")
                raise ValueError(f"Invalid slab bounds [{lower}, {upper}]")
            slabs.append(Slab(vector, lower, upper))
        self.slabs = slabs

        equalities = []
        for vector, value in self.equalities:
            vector = np.asarray(vector, dtype=float).reshape(-1)
            if vector.size != nvars:
                raise ValueError(f"Equality vector has length {vector.size}, expected {nvars}")
            if not np.all(np.isfinite(vector)) or not math.isfinite(float(value)):
                logger.error("LP equality contains NaN or infinity")
                raise ValueError("LP equality contains NaN or infinity")
            equalities.append((vector, float(value)))
        self.equalities = equalities

    @property
    def num_vars(self) -> int:
        return self.objective.size

    def max_violation(self, x: np.ndarray) -> float:
        """Largest constraint violation of the point x (0 when feasible)."""
        worst = 0.0
        for slab in self.slabs:
            v = float(slab.vector @ x)
            worst = max(worst, slab.lower - v, v - slab.upper)
        for vector, value in self.equalities:
            worst = max(worst, abs(float(vector @ x) - value))
        return worst


@dataclass(frozen=True, eq=False)
class LpOutcome:
    status: LpStatus
    value: Optional[float] = None
    point: Optional[np.ndarray] = None
    ray: Optional[np.ndarray] = None
    pivots: int = 0


##########################################################
# Tableau helpers
##########################################################


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])


def _simplex(tableau: np.ndarray, basis: list[int], cost: np.ndarray, pivots: list[int]):
    """Runs primal simplex with Bland's rule on a tableau already in canonical form.

    Returns (True, None) at optimality or (False, entering_column) when unbounded.
    `pivots` is a one-element counter shared across phases.
    """
    while True:
        reduced = cost - cost[basis] @ tableau[:, :-1]
        candidates = np.flatnonzero(reduced < -PIVOT_TOL)
        if candidates.size == 0:
            return True, None
        entering = int(candidates[0])

        column = tableau[:, entering]
        positive = np.flatnonzero(column > PIVOT_TOL)
        if positive.size == 0:
            return False, entering

        ratios = tableau[positive, -1] / column[positive]
        best = ratios.min()
        tied = positive[ratios <= best + 1e-12 * max(1.0, abs(best))]
        leaving = int(min(tied, key=lambda r: basis[r]))

        _pivot(tableau, leaving, entering)
        basis[leaving] = entering

        pivots[0] += 1
        if pivots[0] > ITERATION_CAP:
            logger.error(f"Simplex exceeded {ITERATION_CAP} pivots")
            raise LpCapExceeded(f"Simplex exceeded {ITERATION_CAP} pivots")


def solve_lp(problem: LpProblem) -> LpOutcome:
    """Solves an LP with free variables by the two-phase dense simplex method.

    Each slab becomes up to two one-sided rows (infinite bounds are dropped), free variables are
    split as x = x+ - x-, and rows whose slack can start basic need no artificial variable.

    Args:
        problem (LpProblem): The problem to solve.

    Returns:
        LpOutcome: Optimal (value and point), Unbounded (a recession ray r with c . r < 0) or
            Infeasible.

    Raises:
        LpCapExceeded: If the pivot cap is reached.

    """
    nvars = problem.num_vars
    c = problem.objective

    ub_rows, ub_rhs = [], []
    for slab in problem.slabs:
        if math.isfinite(slab.upper):
            ub_rows.append(slab.vector)
            ub_rhs.append(slab.upper)
        if math.isfinite(slab.lower):
            ub_rows.append(-slab.vector)
            ub_rhs.append(-slab.lower)
    eq_rows = [v for v, _ in problem.equalities]
    eq_rhs = [b for _, b in problem.equalities]

    n_ub, n_eq = len(ub_rows), len(eq_rows)
    m = n_ub + n_eq
    n_struct = 2 * nvars + n_ub

    a = np.zeros((m, n_struct))
    b = np.zeros(m)
    if n_ub:
        a_ub = np.array(ub_rows)
        a[:n_ub, :nvars] = a_ub
        a[:n_ub, nvars:2 * nvars] = -a_ub
        a[:n_ub, 2 * nvars:] = np.eye(n_ub)
        b[:n_ub] = ub_rhs
    if n_eq:
        a_eq = np.array(eq_rows)
        a[n_ub:, :nvars] = a_eq
        a[n_ub:, nvars:2 * nvars] = -a_eq
        b[n_ub:] = eq_rhs

    negative = b < 0
    a[negative] *= -1
    b[negative] *= -1

    # Rows whose own slack has coefficient +1 start with the slack basic.
    needs_artificial = [i for i in range(m) if i >= n_ub or negative[i]]
    n_art = len(needs_artificial)
    tableau = np.zeros((m, n_struct + n_art + 1))
    tableau[:, :n_struct] = a
    tableau[:, -1] = b
    basis = [2 * nvars + i for i in range(m)]
    for k, i in enumerate(needs_artificial):
        tableau[i, n_struct + k] = 1.0
        basis[i] = n_struct + k

    pivots = [0]
    logger.debug(f"Solving LP: {nvars} variables, {n_ub} inequality rows, {n_eq} equality rows")

    if n_art:
        phase1_cost = np.zeros(n_struct + n_art)
        phase1_cost[n_struct:] = 1.0
        _simplex(tableau, basis, phase1_cost, pivots)
        infeasibility = float(phase1_cost[basis] @ tableau[:, -1])
        if infeasibility > FEASIBILITY_TOL * max(1.0, float(np.max(np.abs(b), initial=0.0))):
            logger.debug(f"LP infeasible (phase-1 residual {infeasibility:.3e})")
            return LpOutcome(LpStatus.INFEASIBLE, pivots=pivots[0])

        # Drive artificial variables out of the basis; drop redundant rows.
        keep = []
        for i in range(m):
            if basis[i] < n_struct:
                keep.append(i)
                continue
            candidates = np.flatnonzero(np.abs(tableau[i, :n_struct]) > PIVOT_TOL)
            if candidates.size:
                _pivot(tableau, i, int(candidates[0]))
                basis[i] = int(candidates[0])
                keep.append(i)
        tableau = np.delete(tableau[keep], np.s_[n_struct:n_struct + n_art], axis=1)
        basis = [basis[i] for i in keep]

    cost = np.zeros(n_struct)
    cost[:nvars] = c
    cost[nvars:2 * nvars] = -c
    optimal, entering = _simplex(tableau, basis, cost, pivots)

    if not optimal:
        direction = np.zeros(n_struct)
        direction[entering] = 1.0
        for i, var in enumerate(basis):
            direction[var] = -tableau[i, entering]
        ray = direction[:nvars] - direction[nvars:2 * nvars]
        logger.debug(f"LP unbounded after {pivots[0]} pivots (c.r = {float(c @ ray):.3e})")
        return LpOutcome(LpStatus.UNBOUNDED, ray=ray, pivots=pivots[0])

    y = np.zeros(n_struct)
    for i, var in enumerate(basis):
        y[var] = tableau[i, -1]
    x = y[:nvars] - y[nvars:2 * nvars]
    value = float(c @ x)
    logger.debug(f"LP optimal after {pivots[0]} pivots (value {value:.6g})")
    return LpOutcome(LpStatus.OPTIMAL, value=value, point=x, pivots=pivots[0])
