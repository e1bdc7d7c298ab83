"""Linear constraint systems over triangle and quadrangle indicators.

Two forms are built from a dictionary and a boundary problem:

``B`` form (oriented edges)
    one row per geometric edge, read along its low-to-high orientation; a
    triangle column holds ``+1``/``-1`` on its three edges according to
    whether it runs along them or against them. ``B x = r`` says every edge
    is balanced except the boundary edges, which carry the boundary
    orientation.

``D`` form (triangle, edge) pairs
    one row per triangle ``k`` and each of its three edges ``e``. Triangle
    ``k`` contributes ``+1`` to its three rows, the quadrangle ``{i, j}``
    glued along ``e`` contributes ``-1`` to rows ``(i, e)`` and ``(j, e)``.
    ``D x = r'`` forces every present triangle to be glued to exactly one
    neighbour across each edge, except on the boundary edges held by the
    fixed conormal triangles.

Fixed triangles (the conormal set) are recorded on the system and
substituted out by :meth:`ConstraintSystem.eliminate_fixed`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .geometry import degenerate_mask
from .lattice import TriangleDictionary, adjacent_pairs


class BoundaryError(ValueError):
    """Invalid boundary chain or conormal triangle set."""


class SystemKind(enum.Enum):
    ORIENTED_EDGE_FORM = "B"
    PAIR_FORM = "D"


@dataclass(frozen=True)
class BoundaryProblem:
    """Oriented boundary chain plus the fixed conormal triangles.

    ``boundary_edges`` holds ``(oriented edge id, sign)`` items: sign ``+1``
    means the chain runs along the stored edge, ``-1`` against it.
    """

    boundary_edges: tuple[tuple[int, int], ...] = ()
    conormal_triangles: frozenset[int] = frozenset()
    label: str = ""

    @classmethod
    def from_loops(cls, dictionary: TriangleDictionary, loops, conormal=(), label=""):
        """Build from closed vertex loops (the closing step is implicit)."""
        items = []
        for loop in loops:
            loop = [int(v) for v in loop]
            for a, b in zip(loop, loop[1:] + loop[:1]):
                try:
                    items.append((dictionary.edge_id(a, b), 1))
                except KeyError:
                    raise BoundaryError(f"boundary step {a}->{b} is not a dictionary edge") from None
        return cls(tuple(items), frozenset(int(t) for t in conormal), label)

    def directed(self, dictionary: TriangleDictionary) -> list[tuple[int, int]]:
        out = []
        for e, s in self.boundary_edges:
            a, b = (int(v) for v in dictionary.edges[e])
            out.append((a, b) if s > 0 else (b, a))
        return out

    def edge_rhs(self, dictionary: TriangleDictionary) -> np.ndarray:
        """Boundary vector over geometric edges (low-to-high reading)."""
        r = np.zeros(dictionary.n_geo_edges, dtype=np.int64)
        for e, s in self.boundary_edges:
            r[dictionary.edge_geo[e]] += s * dictionary.edge_sign[e]
        return r

    def validate(self, dictionary: TriangleDictionary) -> None:
        for e, s in self.boundary_edges:
            if not 0 <= e < dictionary.n_edges or s not in (1, -1):
                raise BoundaryError(f"bad boundary item {(e, s)}")
        balance: dict[int, int] = {}
        for a, b in self.directed(dictionary):
            balance[a] = balance.get(a, 0) + 1
            balance[b] = balance.get(b, 0) - 1
        open_at = sorted(v for v, d in balance.items() if d)
        if open_at:
            raise BoundaryError(f"boundary chain not closed at vertices {open_at}")
        if np.any(np.abs(self.edge_rhs(dictionary)) > 1):
            raise BoundaryError("boundary chain runs over an edge more than once")
        chain = {dictionary.edge_geo[e] for e, _ in self.boundary_edges}
        for t in sorted(self.conormal_triangles):
            if not 0 <= t < dictionary.n_triangles:
                raise BoundaryError(f"conormal triangle {t} out of range")
            if not chain.intersection(dictionary.edge_geo[dictionary.tri_edges[t]].tolist()):
                raise BoundaryError(f"conormal triangle {t} does not touch the boundary")

    def held_edges(self, dictionary: TriangleDictionary) -> dict[tuple[int, int], int]:
        """Map ``(triangle, geometric edge)`` -> 1 for the edges pinned by the conormal set.

        Each boundary step must be covered by exactly one conormal triangle
        running along it in the boundary direction.
        """
        self.validate(dictionary)
        held = {}
        for e, s in self.boundary_edges:
            directed = e if s > 0 else int(dictionary.edge_opposite[e])
            g = int(dictionary.edge_geo[directed])
            along = [t for t in sorted(self.conormal_triangles) if directed in dictionary.tri_edges[t]]
            against = [t for t in sorted(self.conormal_triangles)
                       if dictionary.edge_opposite[directed] in dictionary.tri_edges[t]]
            if against:
                raise BoundaryError(
                    f"conormal triangle {against[0]} runs against the boundary on edge "
                    f"{tuple(dictionary.edges[directed])}")
            if len(along) != 1:
                raise BoundaryError(
                    f"boundary edge {tuple(dictionary.edges[directed])} must be held by exactly one "
                    f"conormal triangle, found {len(along)}")
            held[(along[0], g)] = 1
        return held


@dataclass
class ConstraintSystem:
    matrix: sp.csc_array
    rhs: np.ndarray
    fixed_ones: np.ndarray
    var_names: list[str]
    kind: SystemKind
    row_names: list[str]
    n_triangles: int
    pairs: np.ndarray | None = None
    dropped_rows: int = 0
    fixed_zeros: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def n_pairs(self) -> int:
        return 0 if self.pairs is None else len(self.pairs)

    def residual(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float) - self.rhs

    def is_feasible(self, x, tol=1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if np.any(np.abs(x[self.fixed_ones] - 1) > tol) or np.any(np.abs(x[self.fixed_zeros]) > tol):
            return False
        return bool(np.all(np.abs(self.residual(x)) <= tol))

    def eliminate_fixed(self):
        """Substitute fixed variables: returns ``(matrix, rhs, free_columns)``."""
        n = self.matrix.shape[1]
        free = np.setdiff1d(np.arange(n), np.union1d(self.fixed_ones, self.fixed_zeros))
        ones = np.zeros(n)
        ones[self.fixed_ones] = 1
        rhs = self.rhs - self.matrix @ ones
        return self.matrix[:, free], rhs, free


def build_oriented_system(dictionary: TriangleDictionary, problem: BoundaryProblem) -> ConstraintSystem:
    """``B x = r`` with ``x_j = 1`` for conormal triangles ``j``.

    The stored right-hand side is ``r`` for the full variable vector;
    :meth:`ConstraintSystem.eliminate_fixed` yields the reduced ``r~``.
    """
    problem.validate(dictionary)
    d = dictionary
    n = d.n_triangles
    rows = d.edge_geo[d.tri_edges].ravel()
    cols = np.repeat(np.arange(n), 3)
    vals = d.edge_sign[d.tri_edges].ravel()
    mat = sp.csc_array((vals, (rows, cols)), shape=(d.n_geo_edges, n), dtype=np.int64)
    return ConstraintSystem(
        matrix=mat,
        rhs=problem.edge_rhs(d),
        fixed_ones=np.array(sorted(problem.conormal_triangles), dtype=np.int64),
        var_names=[f"T{i}" for i in range(n)],
        kind=SystemKind.ORIENTED_EDGE_FORM,
        row_names=[f"e{a}_{b}" for a, b in d.geo_edges.tolist()],
        n_triangles=n,
    )


def quadrangles(dictionary: TriangleDictionary, consistent: bool = True) -> np.ndarray:
    """Admissible quadrangles: adjacent pairs minus degenerate (folded) hinges."""
    pairs = adjacent_pairs(dictionary, consistent=consistent)
    return pairs[~degenerate_mask(dictionary, pairs)]


def pair_row_index(dictionary: TriangleDictionary) -> np.ndarray:
    """(N, 3) row ids of the D form; row ``3k + s`` is triangle k, edge slot s."""
    return np.arange(3 * dictionary.n_triangles).reshape(-1, 3)


def build_pair_system(dictionary: TriangleDictionary, problem: BoundaryProblem,
                      pairs=None, consistent: bool = True, presolve: bool = False) -> ConstraintSystem:
    """``D x^ = r'`` over triangles followed by quadrangles.

    With ``presolve`` triangles that can never be glued across one of their
    free edges are propagated to ``fixed_zeros``.
    """
    d = dictionary
    held = problem.held_edges(d)
    if pairs is None:
        pairs = quadrangles(d, consistent=consistent)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 3)
    n, p = d.n_triangles, len(pairs)

    tri_geo = d.edge_geo[d.tri_edges]
    row_of = pair_row_index(d)

    def rows_for(tri, geo):
        slot = np.argmax(tri_geo[tri] == geo[:, None], axis=1)
        ok = tri_geo[tri, slot] == geo
        if not np.all(ok):
            raise ValueError("quadrangle edge not shared by its triangles")
        return row_of[tri, slot]

    t_rows = row_of.ravel()
    t_cols = np.repeat(np.arange(n), 3)
    q_rows = np.concatenate([rows_for(pairs[:, 0], pairs[:, 2]), rows_for(pairs[:, 1], pairs[:, 2])])
    q_cols = np.concatenate([n + np.arange(p), n + np.arange(p)])
    rows = np.concatenate([t_rows, q_rows])
    cols = np.concatenate([t_cols, q_cols])
    vals = np.concatenate([np.ones(3 * n, dtype=np.int64), -np.ones(2 * p, dtype=np.int64)])
    mat = sp.csc_array((vals, (rows, cols)), shape=(3 * n, n + p), dtype=np.int64)

    rhs = np.zeros(3 * n, dtype=np.int64)
    for (t, g), v in held.items():
        rhs[row_of[t, np.flatnonzero(tri_geo[t] == g)[0]]] = v

    row_names = [f"T{k}:e{a}_{b}" for k in range(n)
                 for a, b in d.geo_edges[tri_geo[k]].tolist()]
    var_names = [f"T{i}" for i in range(n)] + [f"Q{i}_{j}" for i, j, _ in pairs.tolist()]
    system = ConstraintSystem(
        matrix=mat, rhs=rhs,
        fixed_ones=np.array(sorted(problem.conormal_triangles), dtype=np.int64),
        var_names=var_names, kind=SystemKind.PAIR_FORM, row_names=row_names,
        n_triangles=n, pairs=pairs,
    )
    if presolve:
        system.fixed_zeros = forced_zero_columns(system)
    return system


def forced_zero_columns(system: ConstraintSystem) -> np.ndarray:
    """Columns of a D form that vanish in every feasible point.

    A triangle with a free edge row (rhs 0) and no live quadrangle on that row
    must be absent, and a quadrangle touching an absent triangle is absent
    too. Iterated to a fixed point; fixed-one triangles are never listed.
    """
    n = system.n_triangles
    pairs = system.pairs
    incid = abs(sp.csr_array(system.matrix)[:, n:])
    free_rows = np.flatnonzero(system.rhs == 0)
    tri_dead = np.zeros(n, dtype=bool)
    quad_dead = np.zeros(len(pairs), dtype=bool)
    while True:
        quad_dead |= tri_dead[pairs[:, 0]] | tri_dead[pairs[:, 1]]
        live = incid @ (~quad_dead).astype(np.int64)
        starved = free_rows[live[free_rows] == 0] // 3
        fresh = np.setdiff1d(starved, np.flatnonzero(tri_dead))
        if len(fresh) == 0:
            break
        tri_dead[fresh] = True
    tri_dead[system.fixed_ones] = False
    return np.concatenate([np.flatnonzero(tri_dead), n + np.flatnonzero(quad_dead)]).astype(np.int64)


@dataclass
class AugmentedVector:
    triangle_part: np.ndarray
    quadrangle_part: np.ndarray

    @property
    def array(self) -> np.ndarray:
        return np.concatenate([self.triangle_part, self.quadrangle_part])

    def __len__(self):
        return len(self.triangle_part) + len(self.quadrangle_part)

    @classmethod
    def from_array(cls, x, n_triangles):
        x = np.asarray(x)
        return cls(x[:n_triangles].copy(), x[n_triangles:].copy())

    @classmethod
    def lift(cls, x, pairs):
        """Quadrangle entries set to the products ``x_i x_j``."""
        x = np.asarray(x)
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 3)
        return cls(x.copy(), x[pairs[:, 0]] * x[pairs[:, 1]])


@dataclass
class ConsistencyReport:
    feasible: bool
    violating_rows: list[int]
    fixed_violations: list[int]
    orphan_quadrangles: list[int]
    unpaired_hinges: list[int]

    @property
    def ok(self) -> bool:
        return self.feasible and not self.orphan_quadrangles


def check_consistency(xhat, system: ConstraintSystem, tol=1e-9) -> ConsistencyReport:
    """Feasibility of an integral ``x^`` plus the quadrangle pairing rule.

    ``orphan_quadrangles`` lists quadrangles set to 1 while one of their
    triangles is absent. ``unpaired_hinges`` lists quadrangles at 0 whose two
    triangles are both present; that is legal only where several quadrangles
    share an edge (self-intersections), so it is reported, not failed.
    """
    if system.kind is not SystemKind.PAIR_FORM:
        raise ValueError("check_consistency needs a D-form system")
    x = np.asarray(xhat.array if isinstance(xhat, AugmentedVector) else xhat, dtype=float)
    res = system.residual(x)
    bad_rows = np.flatnonzero(np.abs(res) > tol).tolist()
    bad_fixed = [int(j) for j in system.fixed_ones if abs(x[j] - 1) > tol]
    n = system.n_triangles
    xt, xq = x[:n], x[n:]
    present = (xt[system.pairs[:, 0]] > 0.5) & (xt[system.pairs[:, 1]] > 0.5)
    orphans = np.flatnonzero((xq > 0.5) & ~present).tolist()
    unpaired = np.flatnonzero((xq < 0.5) & present).tolist()
    return ConsistencyReport(
        feasible=not bad_rows and not bad_fixed,
        violating_rows=bad_rows, fixed_violations=bad_fixed,
        orphan_quadrangles=orphans, unpaired_hinges=unpaired,
    )
