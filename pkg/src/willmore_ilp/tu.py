"""Total unimodularity tooling.

Camion's characterization: a {-1, 0, 1} matrix is totally unimodular iff
every Eulerian square submatrix (all row and column sums even) has an entry
sum divisible by four. A certificate is a row and column selection that is
Eulerian with sum = 2 (mod 4); it refutes total unimodularity and can be
checked in linear time. Independently, :func:`minor_determinant_scan`
computes exact integer determinants of all small square submatrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._accel import njit, pick


def _dense(matrix) -> np.ndarray:
    if sp.issparse(matrix):
        matrix = matrix.toarray()
    a = np.asarray(matrix)
    if a.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    if not np.all(a == np.round(a)):
        raise ValueError("matrix must be integral")
    return a.astype(np.int64)


# -- certificates ----------------------------------------------------------------

@dataclass(frozen=True)
class EulerianCertificate:
    row_ids: tuple[int, ...]
    col_ids: tuple[int, ...]
    entry_sum: int

    def __post_init__(self):
        object.__setattr__(self, "row_ids", tuple(int(i) for i in self.row_ids))
        object.__setattr__(self, "col_ids", tuple(int(j) for j in self.col_ids))
        object.__setattr__(self, "entry_sum", int(self.entry_sum))

    @property
    def size(self) -> int:
        return len(self.row_ids)

    def to_text(self) -> str:
        return (f"rows: {' '.join(map(str, self.row_ids))}\n"
                f"cols: {' '.join(map(str, self.col_ids))}\n"
                f"sum: {self.entry_sum}\n")

    @classmethod
    def from_text(cls, text: str) -> "EulerianCertificate":
        fields = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition(":")
            if not sep or key.strip() not in ("rows", "cols", "sum"):
                raise ValueError(f"line {lineno}: expected 'rows:', 'cols:' or 'sum:'")
            try:
                fields[key.strip()] = [int(v) for v in value.split()]
            except ValueError:
                raise ValueError(f"line {lineno}: non-integer value") from None
        missing = {"rows", "cols", "sum"} - fields.keys()
        if missing:
            raise ValueError(f"certificate lacks {sorted(missing)}")
        if len(fields["sum"]) != 1:
            raise ValueError("sum must be a single integer")
        return cls(tuple(fields["rows"]), tuple(fields["cols"]), fields["sum"][0])


@dataclass(frozen=True)
class CertificateCheck:
    is_eulerian: bool
    sum: int
    divisible_by_four: bool
    claimed_sum_matches: bool = True

    @property
    def refutes_tu(self) -> bool:
        return self.is_eulerian and not self.divisible_by_four


def verify_certificate(matrix, cert: EulerianCertificate) -> CertificateCheck:
    """Recompute parities and the entry sum of the selected submatrix."""
    a = _dense(matrix)
    rows, cols = list(cert.row_ids), list(cert.col_ids)
    if len(rows) != len(cols):
        raise ValueError(f"selection is {len(rows)}x{len(cols)}, not square")
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        raise ValueError("repeated row or column index")
    m, n = a.shape
    if any(not 0 <= r < m for r in rows) or any(not 0 <= c < n for c in cols):
        raise IndexError("certificate index out of range")
    sub = a[np.ix_(rows, cols)]
    eulerian = bool(np.all(sub.sum(axis=1) % 2 == 0) and np.all(sub.sum(axis=0) % 2 == 0))
    total = int(sub.sum())
    return CertificateCheck(eulerian, total, total % 4 == 0, total == cert.entry_sum)


# -- exact determinants ------------------------------------------------------------

@njit
def _bareiss_jit(a):
    m = a.copy()
    n = m.shape[0]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k, k] == 0:
            p = -1
            for i in range(k + 1, n):
                if m[i, k] != 0:
                    p = i
                    break
            if p < 0:
                return 0
            for j in range(n):
                t = m[k, j]
                m[k, j] = m[p, j]
                m[p, j] = t
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i, j] = (m[i, j] * m[k, k] - m[i, k] * m[k, j]) // prev
        prev = m[k, k]
    return sign * m[n - 1, n - 1] if n else 1


def _bareiss_numpy(a):
    m = np.array(a, dtype=object)
    n = m.shape[0]
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k, k] == 0:
            nz = np.flatnonzero(m[k + 1:, k] != 0)
            if len(nz) == 0:
                return 0
            p = k + 1 + int(nz[0])
            m[[k, p]] = m[[p, k]]
            sign = -sign
        m[k + 1:, k + 1:] = (m[k + 1:, k + 1:] * m[k, k] - np.outer(m[k + 1:, k], m[k, k + 1:])) // prev
        prev = m[k, k]
    return int(sign * m[n - 1, n - 1])


_bareiss_fast = pick(_bareiss_jit, _bareiss_numpy)


def _bareiss(a):
    # intermediates are minors (Hadamard bound H) and products of two of
    # them appear before the exact division, so int64 needs 2 H^2 < 2^63
    norms = np.sqrt((a.astype(float) ** 2).sum(axis=1))
    if np.prod(np.maximum(norms, 1.0)) < 2.0 ** 30:
        return _bareiss_fast(a)
    return _bareiss_numpy(a)


def exact_det(a) -> int:
    """Integer determinant by fraction-free elimination."""
    a = np.ascontiguousarray(_dense(a))
    if a.shape[0] != a.shape[1]:
        raise ValueError("determinant of a non-square matrix")
    return int(_bareiss(a))


@dataclass(frozen=True)
class MinorWitness:
    row_ids: tuple[int, ...]
    col_ids: tuple[int, ...]
    det: int


def minor_determinant_scan(matrix, max_order: int = 6) -> MinorWitness | None:
    """First square submatrix (by order, then lexicographic) with ``|det| >= 2``.

    ``None`` means every minor up to ``max_order`` lies in {-1, 0, 1}; for
    ``max_order >= min(shape)`` that is a proof of total unimodularity.
    """
    a = _dense(matrix)
    m, n = a.shape
    if a.size and np.abs(a).max() >= 2:
        i, j = np.argwhere(np.abs(a) >= 2)[0]
        return MinorWitness((int(i),), (int(j),), int(a[i, j]))
    for k in range(2, min(max_order, m, n) + 1):
        for rows in itertools.combinations(range(m), k):
            block = a[list(rows)]
            live = np.flatnonzero(np.any(block != 0, axis=0))
            if len(live) < k:
                continue
            for cols in itertools.combinations(live.tolist(), k):
                det = _bareiss(np.ascontiguousarray(block[:, cols]))
                if abs(det) >= 2:
                    return MinorWitness(rows, tuple(cols), int(det))
    return None


# -- searching for certificates -------------------------------------------------

# matrices up to this many cells are probed whole instead of in windows
_WHOLE_MATRIX_CELLS = 250_000

@dataclass
class SearchResult:
    certificate: EulerianCertificate | None
    examined: int = 0
    exhausted: bool = False
    method: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.certificate is not None


def _exhaustive(a, max_size, budget, row_pool=None, col_pool=None):
    """Lexicographic scan of square selections; yields (cert or None, examined, done)."""
    m, n = a.shape
    row_pool = list(range(m)) if row_pool is None else list(row_pool)
    col_pool = list(range(n)) if col_pool is None else list(col_pool)
    examined = 0
    for k in range(1, min(max_size, len(row_pool), len(col_pool)) + 1):
        for rows in itertools.combinations(row_pool, k):
            block = a[list(rows)][:, col_pool]
            # columns must have even sum inside the row selection
            even = np.flatnonzero(block.sum(axis=0) % 2 == 0)
            if len(even) < k:
                examined += 1
                if examined >= budget:
                    return None, examined, False
                continue
            par = block[:, even] % 2
            for pick_ in itertools.combinations(range(len(even)), k):
                examined += 1
                sel = list(pick_)
                if not np.any(par[:, sel].sum(axis=1) % 2):
                    total = int(block[:, even[sel]].sum())
                    if total % 4:
                        cols = tuple(col_pool[j] for j in even[sel])
                        return EulerianCertificate(rows, cols, total), examined, False
                if examined >= budget:
                    return None, examined, False
    return None, examined, True


@njit
def _schur_pivot_jit(a, r, c):
    # eliminate column c with row r (pivot +-1); integer arithmetic stays exact
    m, n = a.shape
    p = a[r, c]
    for i in range(m):
        f = a[i, c]
        if i != r and f != 0:
            for j in range(n):
                a[i, j] -= f * p * a[r, j]


def _schur_pivot_numpy(a, r, c):
    f = a[:, c].copy()
    f[r] = 0
    a -= np.outer(f * a[r, c], a[r])


_schur_pivot = pick(_schur_pivot_jit, _schur_pivot_numpy)


def _pivot_probe(a, rng, max_pivots):
    """Random unimodular pivoting until an entry of modulus >= 2 shows up.

    Returns ``(rows, cols)`` of a square submatrix of ``a`` whose
    determinant has that modulus, or ``None``.
    """
    work = a.copy()
    m, n = work.shape
    used_r = np.zeros(m, dtype=bool)
    used_c = np.zeros(n, dtype=bool)
    piv_r: list[int] = []
    piv_c: list[int] = []
    for _ in range(max_pivots):
        live = work[np.ix_(~used_r, ~used_c)]
        big = np.argwhere(np.abs(live) >= 2)
        ri, ci = np.flatnonzero(~used_r), np.flatnonzero(~used_c)
        if len(big):
            i, j = big[0]
            return piv_r + [int(ri[i])], piv_c + [int(ci[j])]
        units = np.argwhere(live != 0)
        if len(units) == 0:
            return None
        i, j = units[rng.integers(len(units))]
        r, c = int(ri[i]), int(ci[j])
        _schur_pivot(work, r, c)
        used_r[r] = used_c[c] = True
        piv_r.append(r)
        piv_c.append(c)
    return None


def _shrink(a, rows, cols):
    """Drop row/column pairs while the remaining minor keeps ``|det| >= 2``.

    All (k-1)-minors come at once from the adjugate ``det(S) S^-1`` (entry
    ``adj[b, a]`` is the minor without row ``a`` and column ``b``). The
    floating-point adjugate only steers the search; callers verify the
    result exactly.
    """
    rows, cols = list(rows), list(cols)
    while len(rows) > 2:
        sub = a[np.ix_(rows, cols)].astype(float)
        sign, logdet = np.linalg.slogdet(sub)
        if sign == 0:
            break
        adj = sign * np.exp(logdet) * np.linalg.inv(sub)
        minors = np.abs(adj.T)
        # largest surviving minor first, lowest position on ties
        i, j = np.unravel_index(np.argmax(minors), minors.shape)
        if minors[i, j] < 1.5:
            break
        rows = rows[:i] + rows[i + 1:]
        cols = cols[:j] + cols[j + 1:]
    return rows, cols


def _windows(a, rng, window):
    """Row/column neighbourhoods grown breadth-first from random columns."""
    m, n = a.shape
    nz = a != 0
    for seed in rng.permutation(n):
        cols = {int(seed)}
        rows: set[int] = set()
        frontier_c = [int(seed)]
        while frontier_c and len(rows) < window:
            new_r = set(np.flatnonzero(nz[:, frontier_c].any(axis=1)).tolist()) - rows
            rows |= new_r
            if not new_r:
                break
            new_c = set(np.flatnonzero(nz[sorted(new_r)].any(axis=0)).tolist()) - cols
            cols |= new_c
            frontier_c = sorted(new_c)
        yield sorted(rows)[: window * 2], sorted(cols)


def search_eulerian_violation(matrix, max_size: int = 6, budget: int = 200_000,
                              seed: int = 0, window: int = 80) -> SearchResult:
    """Look for an Eulerian square submatrix whose entry sum is 2 mod 4.

    Small selections (up to ``max_size``) are scanned exhaustively in
    lexicographic order with half of ``budget``. Unless that settles the
    question, a heuristic follows: unimodular pivoting on local row/column windows
    exposes a submatrix with ``|det| >= 2``, which is shrunk to a minimal
    one and turned into a certificate. Every returned certificate has been
    re-verified. ``NOT_FOUND`` (``certificate is None``) does not prove total
    unimodularity unless ``exhausted`` is set and ``max_size`` covers the
    smaller matrix dimension.
    """
    a = _dense(matrix)
    if a.size and np.abs(a).max() > 1:
        raise ValueError("entries must lie in {-1, 0, 1}")
    m, n = a.shape
    cert, examined, done = _exhaustive(a, max_size, max(1, budget // 2))
    if cert is not None:
        return SearchResult(cert, examined, False, "exhaustive")
    if done and max_size >= min(m, n):
        return SearchResult(None, examined, True, "exhaustive")

    rng = np.random.default_rng(seed)
    spent = examined
    regions = (itertools.repeat((list(range(m)), list(range(n))))
               if m * n <= _WHOLE_MATRIX_CELLS else _windows(a, rng, window))
    for rows, cols in regions:
        if spent >= budget:
            break
        sub = np.ascontiguousarray(a[np.ix_(rows, cols)])
        hit = _pivot_probe(sub, rng, max_pivots=min(sub.shape))
        spent += max(1, min(sub.shape))
        if hit is None:
            continue
        r_loc, c_loc = _shrink(sub, *hit)
        r_glob = [rows[i] for i in r_loc]
        c_glob = [cols[j] for j in c_loc]
        block = a[np.ix_(r_glob, c_glob)]
        if abs(_bareiss(np.ascontiguousarray(block))) < 2:
            continue
        cand = EulerianCertificate(r_glob, c_glob, int(block.sum()))
        if verify_certificate(a, cand).refutes_tu:
            return SearchResult(cand, spent, False, "pivot")
        # a minimal bad minor is Eulerian; if shrinking stopped early, scan inside
        inner, k, _ = _exhaustive(a, len(r_glob), 50_000, r_glob, c_glob)
        spent += k
        if inner is not None:
            return SearchResult(inner, spent, False, "pivot+exhaustive")
    notes = [f"budget {budget} exhausted"]
    if done:
        notes.insert(0, f"no violation among selections up to {max_size}x{max_size}")
    return SearchResult(None, spent, False, "pivot", notes)


def camion_verdict(matrix, max_size: int = 6, budget: int = 10**7) -> bool | None:
    """True/False for TU when decidable by exhaustive Camion search, else None."""
    a = _dense(matrix)
    res = search_eulerian_violation(a, max_size=max_size, budget=budget)
    if res.found:
        return False
    if res.exhausted and max_size >= min(a.shape):
        return True
    return None


def minor_verdict(matrix, max_order: int = 6) -> bool | None:
    a = _dense(matrix)
    if minor_determinant_scan(a, max_order) is not None:
        return False
    return True if max_order >= min(a.shape) else None


# -- the explicit counterexample ---------------------------------------------------

# quadrangle columns of the counterexample, grouped by the edge they glue across
TABLE1_PAIRS = {
    "e1": [(1, 2), (2, 3), (3, 4), (4, 5), (2, 5), (5, 6), (1, 6), (1, 7), (7, 8), (2, 8)],
    "e2": [(1, 9), (9, 10), (10, 11), (1, 11), (1, 12), (12, 13), (9, 13)],
    "e3": [(9, 5), (5, 14), (14, 15), (9, 15), (9, 16), (16, 17), (5, 17)],
}
TABLE1_TRIANGLES = {1: ("e1", "e2"), 5: ("e1", "e3"), 9: ("e2", "e3")}
TABLE1_ROWS = (
    [(k, "e1") for k in range(1, 9)]
    + [(1, "e2"), (9, "e2")] + [(k, "e2") for k in range(10, 14)]
    + [(9, "e3"), (5, "e3")] + [(k, "e3") for k in range(14, 18)]
)
TABLE1_PADDING = [(k, "e3") for k in range(18, 25)]


@dataclass(frozen=True)
class Table1:
    matrix: np.ndarray
    row_labels: list[str]
    col_labels: list[str]
    n_printed_rows: int

    def certificate(self) -> EulerianCertificate:
        n = self.matrix.shape[0]
        return EulerianCertificate(range(n), range(self.matrix.shape[1]), int(self.matrix.sum()))


def build_table1_matrix(pad: bool = True) -> Table1:
    """Square incidence matrix of a triangle with fans of neighbours on each edge.

    Rows are (triangle, edge) pairs, columns the three centre triangles then
    the quadrangles. The pair-form rule gives ``+1`` for a triangle on its own
    rows and ``-1`` for a quadrangle ``{i, j}`` glued across ``e`` on rows
    ``(i, e)`` and ``(j, e)``. With ``pad`` the seven all-zero rows that make
    the matrix square are appended.
    """
    rows = TABLE1_ROWS + (TABLE1_PADDING if pad else [])
    row_of = {key: i for i, key in enumerate(rows)}
    cols = [("T", k) for k in TABLE1_TRIANGLES] + [
        ("Q", e, i, j) for e, pairs in TABLE1_PAIRS.items() for i, j in pairs]
    a = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for c, col in enumerate(cols):
        if col[0] == "T":
            for e in TABLE1_TRIANGLES[col[1]]:
                a[row_of[(col[1], e)], c] = 1
        else:
            _, e, i, j = col
            a[row_of[(i, e)], c] = -1
            a[row_of[(j, e)], c] = -1
    row_labels = [f"(T{k},{e})" for k, e in rows]
    col_labels = [f"T{c[1]}" if c[0] == "T" else f"T{c[2]},{c[3]}" for c in cols]
    return Table1(a, row_labels, col_labels, len(TABLE1_ROWS))
