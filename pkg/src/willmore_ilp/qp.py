"""Quadratic form of the curvature energy over triangle indicators.

``<Q x, x>`` with ``q_ii`` the per-triangle term and ``q_ij`` half the hinge
energy of each adjacent pair, so the two symmetric entries of a hinge add up
to its full energy. Used as an objective oracle only; nothing here solves
the (non-convex) quadratic program.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .constraints import quadrangles
from .geometry import IntegrandSpec, hinge_terms, triangle_term


@dataclass(frozen=True)
class QuadraticEnergy:
    q_diag: np.ndarray
    q_off: sp.csr_array
    pairs: np.ndarray
    integrand: IntegrandSpec

    @property
    def n(self) -> int:
        return len(self.q_diag)

    def dense(self) -> np.ndarray:
        return self.q_off.toarray() + np.diag(self.q_diag)

    def transpose(self) -> "QuadraticEnergy":
        return QuadraticEnergy(self.q_diag, sp.csr_array(self.q_off.T), self.pairs, self.integrand)


def build_q(dictionary, integrand: IntegrandSpec, pairs=None) -> QuadraticEnergy:
    """Energy matrix of ``integrand``; degenerate hinges get no entry."""
    if pairs is None:
        pairs = quadrangles(dictionary)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 3)
    n = dictionary.n_triangles
    diag = np.array([triangle_term(dictionary, t, integrand) for t in range(n)])
    full, degenerate = hinge_terms(dictionary, pairs, integrand)
    keep = ~degenerate
    i, j, half = pairs[keep, 0], pairs[keep, 1], 0.5 * full[keep]
    off = sp.csr_array(
        (np.concatenate([half, half]), (np.concatenate([i, j]), np.concatenate([j, i]))),
        shape=(n, n),
    )
    return QuadraticEnergy(diag, off, pairs[keep], integrand)


def quadratic_energy(x, Q: QuadraticEnergy) -> float:
    """``sum_ij q_ij x_i x_j`` for a 0/1 vector ``x``."""
    x = np.asarray(x, dtype=float)
    return float(Q.q_diag @ (x * x) + x @ (Q.q_off @ x))
