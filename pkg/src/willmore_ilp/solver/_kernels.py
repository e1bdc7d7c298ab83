"""Simplex inner kernels: basis-inverse update and bounded ratio test."""

import numpy as np

from .._accel import njit, pick


@njit
def _eta_update_jit(binv, alpha, r):
    m = binv.shape[0]
    piv = alpha[r]
    for k in range(m):
        binv[r, k] /= piv
    for i in range(m):
        if i != r:
            f = alpha[i]
            if f != 0.0:
                for k in range(m):
                    binv[i, k] -= f * binv[r, k]


def _eta_update_numpy(binv, alpha, r):
    binv[r] /= alpha[r]
    f = alpha.copy()
    f[r] = 0.0
    binv -= np.outer(f, binv[r])


@njit
def _ratio_jit(xb, lb, ub, alpha, sigma, basis, piv_tol, tie_tol, bland):
    """Largest safe step for entering direction ``sigma``.

    Two passes: the minimum step, then among rows within ``tie_tol`` of it the
    largest pivot (or the lowest basic index under Bland). Returns
    ``(t, r, to_upper)``; ``r == -1`` means no basic variable blocks.
    """
    m = xb.shape[0]
    t = np.empty(m)
    up = np.zeros(m, dtype=np.bool_)
    tmin = np.inf
    for i in range(m):
        d = -sigma * alpha[i]
        if d < -piv_tol:
            t[i] = max((xb[i] - lb[i]) / -d, 0.0)
        elif d > piv_tol and ub[i] < np.inf:
            t[i] = max((ub[i] - xb[i]) / d, 0.0)
            up[i] = True
        else:
            t[i] = np.inf
        if t[i] < tmin:
            tmin = t[i]
    if tmin == np.inf:
        return np.inf, -1, False
    best_r = -1
    best_a = 0.0
    for i in range(m):
        if t[i] <= tmin + tie_tol:
            a = abs(alpha[i])
            if best_r == -1:
                take = True
            elif bland:
                take = basis[i] < basis[best_r]
            else:
                take = a > best_a or (a == best_a and basis[i] < basis[best_r])
            if take:
                best_r = i
                best_a = a
    return t[best_r], best_r, up[best_r]


def _ratio_numpy(xb, lb, ub, alpha, sigma, basis, piv_tol, tie_tol, bland):
    d = -sigma * alpha
    t = np.full(len(xb), np.inf)
    down = d < -piv_tol
    up = (d > piv_tol) & np.isfinite(ub)
    t[down] = np.maximum((xb[down] - lb[down]) / -d[down], 0.0)
    t[up] = np.maximum((ub[up] - xb[up]) / d[up], 0.0)
    tmin = t.min() if len(t) else np.inf
    if tmin == np.inf:
        return np.inf, -1, False
    ties = np.flatnonzero(t <= tmin + tie_tol)
    if bland:
        r = ties[np.argmin(basis[ties])]
    else:
        a = np.abs(alpha[ties])
        top = ties[a == a.max()]
        r = top[np.argmin(basis[top])]
    return float(t[r]), int(r), bool(up[r])


@njit
def _dual_ratio_jit(d, arow, movable, at_upper, below, piv_tol):
    """Entering column for the dual simplex, or -1 if the row proves infeasibility.

    ``below`` is true when the leaving variable sits under its lower bound.
    Among ratios within 1e-12 of the minimum the larger pivot wins, then
    the lower index.
    """
    n = d.shape[0]
    t = np.full(n, np.inf)
    tmin = np.inf
    for j in range(n):
        if not movable[j]:
            continue
        a = arow[j]
        if below:
            ok = (a < -piv_tol and not at_upper[j]) or (a > piv_tol and at_upper[j])
        else:
            ok = (a > piv_tol and not at_upper[j]) or (a < -piv_tol and at_upper[j])
        if ok:
            t[j] = abs(d[j]) / abs(a)
            if t[j] < tmin:
                tmin = t[j]
    if tmin == np.inf:
        return -1
    best_j = -1
    best_a = 0.0
    for j in range(n):
        if t[j] <= tmin + 1e-12 and abs(arow[j]) > best_a:
            best_j = j
            best_a = abs(arow[j])
    return best_j


def _dual_ratio_numpy(d, arow, movable, at_upper, below, piv_tol):
    if below:
        ok = ((arow < -piv_tol) & ~at_upper) | ((arow > piv_tol) & at_upper)
    else:
        ok = ((arow > piv_tol) & ~at_upper) | ((arow < -piv_tol) & at_upper)
    ok &= movable
    if not ok.any():
        return -1
    t = np.full(len(d), np.inf)
    t[ok] = np.abs(d[ok]) / np.abs(arow[ok])
    ties = np.flatnonzero(t <= t.min() + 1e-12)
    return int(ties[np.argmax(np.abs(arow[ties]))])

eta_update = pick(_eta_update_jit, _eta_update_numpy)
ratio_test = pick(_ratio_jit, _ratio_numpy)
dual_ratio = pick(_dual_ratio_jit, _dual_ratio_numpy)
