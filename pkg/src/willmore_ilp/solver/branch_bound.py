"""Branch-and-bound over binary variables and integrality diagnosis."""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

import numpy as np

from .lp import LinearProgram, SolveReport, Status, fractional_indices
from .simplex import INT_TOL, Engine


def _branch_var(x, frac):
    # most fractional, lowest index on ties (frac is sorted)
    dist = np.abs(x[frac] - 0.5)
    return int(frac[np.argmin(dist)])


def ilp_solve(lp: LinearProgram, node_limit: int = 100_000, tol_int: float = INT_TOL,
              max_iter: int = 50_000) -> SolveReport:
    """Optimal 0/1 solution of ``lp`` restricted to its integer variables.

    Depth-first dive into the child nearer the LP value, best-bound
    backtracking from a heap of open nodes. Children are warm-started from
    the parent basis with the dual simplex. ``nodes`` counts child LPs.
    """
    t0 = time.perf_counter()
    engine = Engine(lp, max_iter)
    root = engine.solve()
    if root.status is not Status.OPTIMAL:
        root.wall_time = time.perf_counter() - t0
        return root
    root_bound = root.objective_value
    iterations = root.iterations

    incumbent: np.ndarray | None = None
    best = np.inf
    nodes = 0
    counter = 0
    heap: list = []
    # bounds of nodes abandoned at the iteration limit
    lost: list[float] = []

    def push(bound, lo, hi, state):
        nonlocal counter
        counter += 1
        heapq.heappush(heap, (bound, counter, lo, hi, state))

    def solve_child(lo, hi):
        nonlocal nodes, iterations
        engine.set_bounds(lo, hi)
        rep = engine.reoptimize()
        nodes += 1
        iterations += rep.iterations
        return rep

    def dive(rep, lower, upper):
        nonlocal incumbent, best
        while True:
            if rep.objective_value >= best - 1e-9:
                return
            frac = fractional_indices(rep.x, tol_int)
            frac = frac[lp.integer[frac]]
            if len(frac) == 0:
                best = rep.objective_value
                incumbent = rep.x.copy()
                return
            j = _branch_var(rep.x, frac)
            first_up = rep.x[j] >= 0.5
            kids = []
            for up in (first_up, not first_up):
                lo, hi = lower.copy(), upper.copy()
                if up:
                    lo[j] = 1.0
                else:
                    hi[j] = 0.0
                kids.append((lo, hi))
            state = engine.tab.snapshot()
            # the sibling waits with the parent's bound and basis
            push(rep.objective_value, *kids[1], state)
            if nodes >= node_limit:
                push(rep.objective_value, *kids[0], state)
                return
            lower, upper = kids[0]
            parent_bound = rep.objective_value
            rep = solve_child(lower, upper)
            if rep.status is Status.ITERATION_LIMIT:
                lost.append(parent_bound)
            if rep.status is not Status.OPTIMAL:
                return

    dive(root, lp.lower.copy(), lp.upper.copy())
    while heap and nodes < node_limit:
        bound, _, lo, hi, state = heapq.heappop(heap)
        if bound >= best - 1e-9:
            continue
        engine.tab.restore(state)
        rep = solve_child(lo, hi)
        if rep.status is Status.ITERATION_LIMIT:
            lost.append(bound)
        if rep.status is Status.OPTIMAL:
            dive(rep, lo, hi)

    open_bounds = [h[0] for h in heap if h[0] < best - 1e-9] + [v for v in lost if v < best - 1e-9]
    exhausted = not open_bounds
    wall = time.perf_counter() - t0
    if incumbent is None:
        status = Status.INFEASIBLE if exhausted else Status.NODE_LIMIT
        return SolveReport(status, None, float("nan"), iterations=iterations, nodes=nodes,
                           wall_time=wall, bound=float("inf") if exhausted else root_bound)
    x = incumbent.copy()
    x[lp.integer] = np.round(x[lp.integer])
    bound = best if exhausted else max(root_bound, min(open_bounds))
    return SolveReport(
        Status.OPTIMAL if exhausted else Status.NODE_LIMIT,
        x,
        lp.objective(x),
        fractional_vars=fractional_indices(x, tol_int),
        iterations=iterations,
        nodes=nodes,
        wall_time=wall,
        dual_objective=root.dual_objective,
        bound=bound,
        proven_optimal=exhausted,
    )


@dataclass
class RoundCheck:
    zeros: np.ndarray
    ones: np.ndarray
    fractional: np.ndarray
    tol: float

    @property
    def counts(self) -> dict[str, int]:
        return {"zero": len(self.zeros), "one": len(self.ones), "fractional": len(self.fractional)}

    def classify(self, i) -> str:
        if i in set(self.fractional.tolist()):
            return "fractional"
        return "one" if i in set(self.ones.tolist()) else "zero"


def round_check(report: SolveReport, tol: float = INT_TOL) -> RoundCheck:
    """Split the variables of an optimal report into 0, 1 and fractional."""
    if report.x is None:
        raise ValueError(f"report has no solution (status {report.status.value})")
    x = np.asarray(report.x, dtype=float)
    zeros = np.flatnonzero(x <= tol)
    ones = np.flatnonzero(x >= 1.0 - tol)
    frac = np.flatnonzero((x > tol) & (x < 1.0 - tol))
    return RoundCheck(zeros, ones, frac, tol)
