"""Linear programs over augmented indicator vectors and solve reports."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..constraints import ConstraintSystem
from ..geometry import IntegrandSpec, hinge_terms, triangle_term


@dataclass
class EnergyWeights:
    """Linear costs: one per triangle, one per quadrangle (full hinge energy)."""

    triangle_costs: np.ndarray
    quadrangle_costs: np.ndarray
    pairs: np.ndarray

    @property
    def objective(self) -> np.ndarray:
        return np.concatenate([self.triangle_costs, self.quadrangle_costs])


def energy_weights(dictionary, integrand: IntegrandSpec, pairs) -> EnergyWeights:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 3)
    tri = np.array([triangle_term(dictionary, t, integrand) for t in range(dictionary.n_triangles)])
    quad, degenerate = hinge_terms(dictionary, pairs, integrand)
    if degenerate.any():
        raise ValueError(f"{int(degenerate.sum())} degenerate hinges among the quadrangles")
    return EnergyWeights(tri, quad, pairs)


@dataclass
class LinearProgram:
    """``min c.x  s.t.  A x = b,  lower <= x <= upper``."""

    c: np.ndarray
    A: sp.csr_array
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    var_names: list[str]
    row_names: list[str]
    integer: np.ndarray
    name: str = "willmore"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = sp.csr_array(self.A)
        self.b = np.asarray(self.b, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        self.integer = np.asarray(self.integer, dtype=bool)
        m, n = self.A.shape
        if not (len(self.c) == len(self.lower) == len(self.upper) == len(self.integer) == n):
            raise ValueError("inconsistent variable dimensions")
        if len(self.b) != m:
            raise ValueError("inconsistent row dimensions")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("objective must be finite")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound above upper bound")

    @property
    def shape(self):
        return self.A.shape

    def with_bounds(self, lower, upper) -> "LinearProgram":
        return LinearProgram(self.c, self.A, self.b, lower, upper, self.var_names,
                             self.row_names, self.integer, self.name)

    def objective(self, x) -> float:
        return float(self.c @ x)

    def max_violation(self, x) -> tuple[float, float]:
        """(equality residual, bound violation) in max norm."""
        x = np.asarray(x, dtype=float)
        eq = float(np.max(np.abs(self.A @ x - self.b), initial=0.0))
        bnd = float(max(np.max(self.lower - x, initial=0.0), np.max(x - self.upper, initial=0.0)))
        return eq, bnd


def build_lp(system: ConstraintSystem, weights, name="willmore") -> LinearProgram:
    """LP relaxation of ``system`` with objective ``weights``.

    Fixed triangles get ``lower = upper = 1`` and presolved columns
    ``upper = 0``; the solver substitutes both out.
    """
    c = weights.objective if isinstance(weights, EnergyWeights) else np.asarray(weights, dtype=float)
    n = system.matrix.shape[1]
    if len(c) != n:
        raise ValueError(f"objective has {len(c)} entries for {n} variables")
    lower = np.zeros(n)
    upper = np.ones(n)
    lower[system.fixed_ones] = 1.0
    upper[system.fixed_zeros] = 0.0
    return LinearProgram(c, sp.csr_array(system.matrix, dtype=float), system.rhs.astype(float),
                         lower, upper, list(system.var_names), list(system.row_names),
                         np.ones(n, dtype=bool), name)


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    ITERATION_LIMIT = "iteration_limit"
    NODE_LIMIT = "node_limit"
    UNBOUNDED = "unbounded"


@dataclass
class SolveReport:
    status: Status
    x: np.ndarray | None
    objective_value: float
    fractional_vars: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    iterations: int = 0
    nodes: int = 0
    wall_time: float = 0.0
    dual_objective: float = float("nan")
    duals: np.ndarray | None = None
    farkas: np.ndarray | None = None
    bound: float = float("nan")
    proven_optimal: bool = False
    trace: list = field(default_factory=list)

    @property
    def n_fractional(self) -> int:
        return len(self.fractional_vars)

    def to_text(self) -> str:
        lines = [
            f"status: {self.status.value}",
            f"objective: {self.objective_value!r}",
            f"bound: {self.bound!r}",
            f"dual_objective: {self.dual_objective!r}",
            f"proven_optimal: {str(self.proven_optimal).lower()}",
            f"fractional: {self.n_fractional}",
            f"iterations: {self.iterations}",
            f"nodes: {self.nodes}",
            f"wall_time: {self.wall_time:.6f}",
        ]
        if self.n_fractional:
            lines.append("fractional_vars: " + " ".join(str(i) for i in self.fractional_vars))
        return "\n".join(lines) + "\n"


def fractional_indices(x, tol=1e-7) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.flatnonzero((x > tol) & (x < 1.0 - tol))
