"""Bounded-variable revised simplex.

Dense explicit basis inverse with rank-one updates; it is refactorized when
the primal residual drifts and at least every ``max(64, m)`` pivots.
Dantzig pricing; after a run of degenerate pivots the rule switches to
least-index (Bland) until the objective moves again, which rules out
cycling. Phase 1 minimizes the sum of one artificial per row. A bounded dual
simplex re-optimizes after bound changes, which branch-and-bound uses for
warm starts.
"""

from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp

from ._kernels import dual_ratio, eta_update, ratio_test
from .lp import LinearProgram, SolveReport, Status, fractional_indices

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
PIV_TOL = 1e-9
INT_TOL = 1e-7
SNAP_TOL = 1e-11
REFACTOR_EVERY = 64
DEGENERATE_RUN = 50


class Tableau:
    """Working state for ``min c.x, A x = b, l <= x <= u`` with ``b >= 0``.

    One artificial column per row is appended; it starts basic.
    """

    def __init__(self, A: sp.csc_array, b, u):
        m, n = A.shape
        self.m, self.n = m, n
        self.A = sp.csc_array(sp.hstack([A, sp.identity(m, format="csc")], format="csc"))
        self.AT = sp.csr_array(self.A.T)
        self.b = b
        self.l = np.zeros(n + m)
        self.u = np.concatenate([u, np.full(m, np.inf)])
        self.basis = np.arange(n, n + m)
        self.at_upper = np.zeros(n + m, dtype=bool)
        self.is_basic = np.zeros(n + m, dtype=bool)
        self.is_basic[self.basis] = True
        self.binv = np.eye(m)
        self.xb = b.copy()
        self.iterations = 0
        self._since_refactor = 0

    def ftran(self, j) -> np.ndarray:
        """``B^-1 a_j`` using only the nonzeros of column ``j``."""
        s, e = self.A.indptr[j], self.A.indptr[j + 1]
        return self.binv[:, self.A.indices[s:e]] @ self.A.data[s:e]

    def nonbasic_values(self) -> np.ndarray:
        x = np.where(self.at_upper, self.u, self.l)
        x[self.basis] = 0.0
        return x

    def refactor(self):
        if self.m:
            self.binv = np.linalg.inv(self.A[:, self.basis].toarray())
        self.recompute_xb()
        self._since_refactor = 0

    def recompute_xb(self):
        self.xb = self.binv @ (self.b - self.A @ self.nonbasic_values())

    def primal(self) -> np.ndarray:
        x = np.where(self.at_upper, self.u, self.l)
        x[self.basis] = self.xb
        return x

    def drift(self) -> float:
        return float(np.max(np.abs(self.A @ self.primal() - self.b), initial=0.0))

    def duals(self, c) -> np.ndarray:
        return c[self.basis] @ self.binv

    def snapshot(self):
        return self.basis.copy(), self.at_upper.copy()

    def restore(self, state):
        basis, at_upper = state
        self.basis = basis.copy()
        self.at_upper = at_upper.copy()
        self.is_basic[:] = False
        self.is_basic[self.basis] = True
        self.refactor()

    def _pivot(self, q, r, alpha, leaving_up):
        leaving = self.basis[r]
        eta_update(self.binv, alpha, r)
        self.basis[r] = q
        self.is_basic[q] = True
        self.is_basic[leaving] = False
        self.at_upper[q] = False
        self.at_upper[leaving] = leaving_up
        self._since_refactor += 1

    def _maybe_refactor(self):
        # cheap drift check every 64 pivots, forced refactor every max(64, m)
        k = self._since_refactor
        if k and k % REFACTOR_EVERY == 0:
            if k >= max(REFACTOR_EVERY, self.m) or self.drift() > 1e-9:
                self.refactor()

    def run(self, c, max_iter, trace=None, bound_fn=None):
        """Primal simplex on cost ``c`` (length ``n + m``). Returns a Status."""
        degenerate = 0
        bland = False
        movable = self.u > self.l
        y = self.duals(c)
        while True:
            if self._since_refactor == 0:
                y = self.duals(c)
            d = c - self.AT @ y
            if trace is not None:
                trace.append((float(c @ self.primal()), bound_fn(y, d)))
            elig = (~self.is_basic) & movable & np.where(self.at_upper, d > OPT_TOL, d < -OPT_TOL)
            cand = np.flatnonzero(elig)
            if len(cand) == 0:
                return Status.OPTIMAL
            if self.iterations >= max_iter:
                return Status.ITERATION_LIMIT
            q = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            sigma = -1.0 if self.at_upper[q] else 1.0
            alpha = self.ftran(q)
            t, r, to_upper = ratio_test(self.xb, self.l[self.basis], self.u[self.basis], alpha,
                                        sigma, self.basis, PIV_TOL, 1e-12, bland)
            flip = self.u[q] - self.l[q]
            if flip <= t:
                if not np.isfinite(flip):
                    return Status.UNBOUNDED
                self.xb -= sigma * flip * alpha
                self.at_upper[q] = not self.at_upper[q]
                t = flip
            else:
                start = self.u[q] if self.at_upper[q] else self.l[q]
                self.xb -= sigma * t * alpha
                self.xb[r] = start + sigma * t
                y = y + (d[q] / alpha[r]) * self.binv[r]
                self._pivot(q, r, alpha, to_upper)
            self.iterations += 1
            if t * abs(d[q]) <= 1e-12:
                degenerate += 1
                bland = bland or degenerate >= DEGENERATE_RUN
            else:
                degenerate = 0
                bland = False
            self._maybe_refactor()

    def dual_run(self, c, max_iter):
        """Dual simplex from a dual feasible basis.

        Returns OPTIMAL once primal feasible, INFEASIBLE when a row admits no
        entering column.
        """
        movable = self.u > self.l
        y = self.duals(c)
        while True:
            lb, ub = self.l[self.basis], self.u[self.basis]
            below = lb - self.xb
            above = self.xb - ub
            viol = np.maximum(below, above)
            r = int(np.argmax(viol)) if self.m else 0
            if self.m == 0 or viol[r] <= FEAS_TOL:
                return Status.OPTIMAL
            if self.iterations >= max_iter:
                return Status.ITERATION_LIMIT
            is_below = bool(below[r] > above[r])
            if self._since_refactor == 0:
                y = self.duals(c)
            d = c - self.AT @ y
            arow = self.AT @ self.binv[r]
            q = dual_ratio(d, arow, movable & ~self.is_basic, self.at_upper, is_below, PIV_TOL)
            if q < 0:
                return Status.INFEASIBLE
            alpha = self.ftran(q)
            target = lb[r] if is_below else ub[r]
            step = (self.xb[r] - target) / alpha[r]
            start = self.u[q] if self.at_upper[q] else self.l[q]
            self.xb -= step * alpha
            self.xb[r] = start + step
            y = y + (d[q] / alpha[r]) * self.binv[r]
            self._pivot(q, r, alpha, not is_below)
            self.iterations += 1
            self._maybe_refactor()


def _lagrangian(lp: LinearProgram, y) -> float:
    """Lower bound ``b.y + sum_j min_{l<=x<=u} (c - A^T y)_j x_j``."""
    d = lp.c - lp.A.T @ y
    # a zero reduced cost contributes nothing even on an unbounded side
    best = np.where(d > 0, d * lp.lower, 0.0) + np.where(d < 0, d * np.where(d < 0, lp.upper, 0.0), 0.0)
    return float(lp.b @ y + best.sum())


def verify_farkas(lp: LinearProgram, y, tol=1e-9) -> bool:
    """True if ``y`` proves ``A x = b`` has no solution inside the bounds."""
    y = np.asarray(y, dtype=float)
    g = lp.A.T @ y
    best = np.maximum(g * lp.lower, g * lp.upper)
    return float(lp.b @ y - best.sum()) > tol


class Engine:
    """Standardized form of an LP plus a reusable tableau.

    Columns fixed by the LP's own bounds are substituted out, empty rows
    dropped (or reported infeasible) and rows flipped to ``b >= 0``.
    """

    def __init__(self, lp: LinearProgram, max_iter: int = 50_000):
        if np.any(~np.isfinite(lp.lower)):
            raise ValueError("free variables are not supported; give finite lower bounds")
        self.lp = lp
        self.max_iter = max_iter
        A = sp.csc_array(lp.A)
        self.free = np.flatnonzero(lp.upper - lp.lower > 0.0)
        b = lp.b - A @ lp.lower
        A_free = A[:, self.free]
        nz = np.diff(sp.csr_array(A_free).indptr) > 0
        self.flip = np.where(b < 0, -1.0, 1.0)
        self.empty_bad = np.flatnonzero(~nz & (np.abs(b) > FEAS_TOL))
        self.rows = np.flatnonzero(nz)
        A_w = sp.csc_array(sp.diags(self.flip[self.rows]) @ A_free[self.rows, :])
        self.b_w = np.abs(b[self.rows])
        self.tab = Tableau(A_w, self.b_w, (lp.upper - lp.lower)[self.free])
        n, m = self.tab.n, self.tab.m
        self.c1 = np.concatenate([np.zeros(n), np.ones(m)])
        self.c2 = np.concatenate([lp.c[self.free], np.zeros(m)])
        self.position = np.full(lp.shape[1], -1)
        self.position[self.free] = np.arange(len(self.free))

    def to_rows(self, yw) -> np.ndarray:
        y = np.zeros(self.lp.shape[0])
        y[self.rows] = yw * self.flip[self.rows]
        return y

    def solution(self) -> np.ndarray:
        lp = self.lp
        x = lp.lower.copy()
        x[self.free] += self.tab.primal()[: self.tab.n]
        x = np.clip(x, lp.lower, lp.upper)
        x = np.where(np.abs(x - lp.lower) <= SNAP_TOL, lp.lower, x)
        return np.where(np.abs(x - lp.upper) <= SNAP_TOL, lp.upper, x)

    def report(self, status, t0, with_x=True, farkas=None, trace=None) -> SolveReport:
        rep = SolveReport(status, None, float("nan"), iterations=self.tab.iterations,
                          wall_time=time.perf_counter() - t0, trace=trace or [])
        rep.farkas = farkas
        if with_x:
            rep.x = self.solution()
            rep.objective_value = self.lp.objective(rep.x)
            rep.fractional_vars = fractional_indices(rep.x, INT_TOL)
            if status is not Status.UNBOUNDED:
                rep.duals = self.to_rows(self.tab.duals(self.c2))
                rep.dual_objective = _lagrangian(self.lp, rep.duals)
                rep.bound = rep.dual_objective
        rep.proven_optimal = status is Status.OPTIMAL
        return rep

    def solve(self, trace: bool = False) -> SolveReport:
        """Two-phase primal simplex from the artificial basis."""
        t0 = time.perf_counter()
        lp, tab = self.lp, self.tab
        if len(self.empty_bad):
            y = np.zeros(lp.shape[0])
            y[self.empty_bad[0]] = np.sign((lp.b - lp.A @ lp.lower)[self.empty_bad[0]])
            return self.report(Status.INFEASIBLE, t0, with_x=False, farkas=y)

        status = tab.run(self.c1, self.max_iter)
        if status is Status.ITERATION_LIMIT:
            return self.report(status, t0, with_x=False)
        tab.refactor()
        infeas = float(tab.xb[tab.basis >= tab.n].sum())
        if infeas > FEAS_TOL * max(1.0, self.b_w.max(initial=0.0)):
            y = self.to_rows(tab.duals(self.c1))
            return self.report(Status.INFEASIBLE, t0, with_x=False, farkas=y)

        # phase 2: artificials pinned at zero
        tab.u[tab.n:] = 0.0
        tab.at_upper[tab.n:] = False
        hist = [] if trace else None

        def bound_fn(yw, d):
            return _lagrangian(lp, self.to_rows(yw))

        status = tab.run(self.c2, self.max_iter, hist, bound_fn if trace else None)
        tab.refactor()
        return self.report(status, t0, trace=hist)

    def set_bounds(self, lower, upper):
        """Replace the bounds of the structural columns (original indexing).

        Nonbasic columns move with their bound; the basis is kept, so the
        tableau stays dual feasible.
        """
        tab = self.tab
        lo = (np.asarray(lower, dtype=float) - self.lp.lower)[self.free]
        hi = (np.asarray(upper, dtype=float) - self.lp.lower)[self.free]
        if np.any(lo > hi):
            raise ValueError("lower bound above upper bound")
        tab.l[: tab.n] = lo
        tab.u[: tab.n] = hi
        tab.recompute_xb()

    def reoptimize(self) -> SolveReport:
        """Dual simplex then a primal clean-up pass after :meth:`set_bounds`."""
        t0 = time.perf_counter()
        tab = self.tab
        start = tab.iterations
        status = tab.dual_run(self.c2, start + self.max_iter)
        if status is Status.OPTIMAL:
            status = tab.run(self.c2, start + self.max_iter)
            tab.refactor()
            if tab.drift() > FEAS_TOL or np.any(tab.xb < tab.l[tab.basis] - FEAS_TOL) \
                    or np.any(tab.xb > tab.u[tab.basis] + FEAS_TOL):
                # numerical trouble: recover primal feasibility from scratch
                status = tab.dual_run(self.c2, start + self.max_iter)
                if status is Status.OPTIMAL:
                    status = tab.run(self.c2, start + self.max_iter)
                    tab.refactor()
        rep = self.report(status, t0, with_x=status is Status.OPTIMAL)
        rep.iterations = tab.iterations - start
        return rep


def lp_solve(lp: LinearProgram, max_iter: int = 50_000, trace: bool = False) -> SolveReport:
    """Solve the LP relaxation; returns a vertex solution or a certificate.

    With ``trace`` the report carries ``(primal objective, Lagrangian bound)``
    for every phase-2 iteration.
    """
    return Engine(lp, max_iter).solve(trace=trace)
