"""Dictionary of oriented lattice triangles.

Vertices live on the integer lattice ``{0..nx} x {0..ny} x {0..nz}``; world
coordinates are the lattice coordinates times ``epsilon = 1 / resolution_n``.
A triangle enters the dictionary when its three vertices are pairwise within
``max_edge_len`` lattice units and not collinear. Each geometric triangle and
each geometric edge is stored twice, once per orientation.

Indices are 0-based and deterministic: oriented triangles are sorted
lexicographically by their vertex tuple, written with the smallest vertex
first, and oriented edges are sorted by ``(tail, head)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from ._accel import njit, pick

_LEN_TOL = 1e-9


class EmptyDictionaryError(ValueError):
    """Raised when a lattice spec admits no triangle at all."""


@dataclass(frozen=True)
class LatticeSpec:
    resolution_n: int = 1
    bounding_box: tuple[int, int, int] = (1, 1, 1)
    max_edge_len: float = math.sqrt(2.0)

    def __post_init__(self):
        if int(self.resolution_n) != self.resolution_n or self.resolution_n < 1:
            raise ValueError(f"resolution_n must be a positive integer, got {self.resolution_n}")
        box = tuple(int(b) for b in self.bounding_box)
        if len(box) != 3 or min(box) < 0:
            raise ValueError(f"bounding_box needs three non-negative extents, got {self.bounding_box}")
        object.__setattr__(self, "bounding_box", box)
        if not self.max_edge_len > 0:
            raise ValueError("max_edge_len must be positive")

    @property
    def epsilon(self) -> float:
        return 1.0 / self.resolution_n

    def lattice_points(self) -> np.ndarray:
        nx, ny, nz = self.bounding_box
        grid = np.indices((nx + 1, ny + 1, nz + 1)).reshape(3, -1).T
        return np.ascontiguousarray(grid, dtype=np.int64)


class OrientedTriangle(NamedTuple):
    id: int
    vertex_ids: tuple[int, int, int]


class OrientedEdge(NamedTuple):
    id: int
    endpoint_ids: tuple[int, int]


# -- triple enumeration kernels ------------------------------------------------

@njit
def _triples_jit(points, max_sq):
    n = points.shape[0]
    out = np.empty((16, 3), dtype=np.int64)
    count = 0
    for a in range(n):
        for b in range(a + 1, n):
            dab = 0.0
            for k in range(3):
                t = points[b, k] - points[a, k]
                dab += t * t
            if dab > max_sq:
                continue
            for c in range(b + 1, n):
                dac = 0.0
                dbc = 0.0
                for k in range(3):
                    t = points[c, k] - points[a, k]
                    dac += t * t
                    t = points[c, k] - points[b, k]
                    dbc += t * t
                if dac > max_sq or dbc > max_sq:
                    continue
                ux = points[b, 0] - points[a, 0]
                uy = points[b, 1] - points[a, 1]
                uz = points[b, 2] - points[a, 2]
                vx = points[c, 0] - points[a, 0]
                vy = points[c, 1] - points[a, 1]
                vz = points[c, 2] - points[a, 2]
                cx = uy * vz - uz * vy
                cy = uz * vx - ux * vz
                cz = ux * vy - uy * vx
                if cx == 0 and cy == 0 and cz == 0:
                    continue
                if count == out.shape[0]:
                    grown = np.empty((2 * count, 3), dtype=np.int64)
                    grown[:count] = out
                    out = grown
                out[count, 0] = a
                out[count, 1] = b
                out[count, 2] = c
                count += 1
    return out[:count].copy()


def _triples_numpy(points, max_sq):
    pts = points.astype(np.int64)
    diff = pts[:, None, :] - pts[None, :, :]
    close = (diff * diff).sum(-1) <= max_sq
    np.fill_diagonal(close, False)
    chunks = []
    for a in range(len(pts)):
        nb = np.flatnonzero(close[a, a + 1:]) + a + 1
        if len(nb) < 2:
            continue
        sub = np.triu(close[np.ix_(nb, nb)], k=1)
        ib, ic = np.nonzero(sub)
        if len(ib):
            chunks.append(np.column_stack([np.full(len(ib), a), nb[ib], nb[ic]]))
    if not chunks:
        return np.empty((0, 3), dtype=np.int64)
    tri = np.concatenate(chunks)
    cross = np.cross(pts[tri[:, 1]] - pts[tri[:, 0]], pts[tri[:, 2]] - pts[tri[:, 0]])
    tri = tri[np.any(cross != 0, axis=1)]
    order = np.lexsort((tri[:, 2], tri[:, 1], tri[:, 0]))
    return tri[order]


enumerate_triples = pick(_triples_jit, _triples_numpy)


def _lex_order(rows: np.ndarray) -> np.ndarray:
    return np.lexsort(rows.T[::-1])


class TriangleDictionary:
    """Oriented triangles and oriented edges over a fixed vertex set.

    Parameters
    ----------
    points : (V, 3) array
        World coordinates of the vertices.
    triples : (G, 3) int array
        Geometric triangles as vertex triples. Both orientations are added.
    spec : LatticeSpec, optional
        The generating spec, when the dictionary came from a lattice.
    lattice : (V, 3) int array, optional
        Integer lattice coordinates of the vertices.
    """

    def __init__(self, points, triples, spec=None, lattice=None):
        self.spec = spec
        self.points = np.ascontiguousarray(points, dtype=np.float64)
        self.lattice = None if lattice is None else np.asarray(lattice, dtype=np.int64)
        n_vert = len(self.points)

        triples = np.sort(np.asarray(triples, dtype=np.int64).reshape(-1, 3), axis=1)
        triples = np.unique(triples, axis=0)
        if len(triples) == 0:
            raise EmptyDictionaryError("empty dictionary: no admissible triangle")
        if triples.min() < 0 or triples.max() >= n_vert:
            raise ValueError("triangle vertex index out of range")
        if np.any((triples[:, 0] == triples[:, 1]) | (triples[:, 1] == triples[:, 2])):
            raise ValueError("triangle with repeated vertex")

        a, b, c = triples.T
        oriented = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, b])])
        oriented = oriented[_lex_order(oriented)]
        self.triangles = oriented

        directed = np.concatenate([oriented[:, [0, 1]], oriented[:, [1, 2]], oriented[:, [2, 0]]])
        directed = np.concatenate([directed, directed[:, ::-1]])
        self.edges = np.unique(directed, axis=0)

        self._n_vert = n_vert
        self._edge_keys = self.edges[:, 0] * n_vert + self.edges[:, 1]
        self._tri_keys = (oriented[:, 0] * n_vert + oriented[:, 1]) * n_vert + oriented[:, 2]

        self.tri_edges = np.column_stack([
            self.edge_id(oriented[:, 0], oriented[:, 1]),
            self.edge_id(oriented[:, 1], oriented[:, 2]),
            self.edge_id(oriented[:, 2], oriented[:, 0]),
        ])
        self.edge_opposite = self.edge_id(self.edges[:, 1], self.edges[:, 0])
        self.tri_opposite = np.searchsorted(
            self._tri_keys,
            (oriented[:, 0] * n_vert + oriented[:, 2]) * n_vert + oriented[:, 1],
        )

        # geometric (unoriented) edges are the oriented ones with tail < head
        forward = self.edges[:, 0] < self.edges[:, 1]
        self.geo_edges = self.edges[forward]
        geo_of_forward = np.cumsum(forward) - 1
        self.edge_geo = np.where(forward, geo_of_forward, geo_of_forward[self.edge_opposite])
        # +1 when the oriented edge runs tail < head
        self.edge_sign = np.where(forward, 1, -1).astype(np.int64)

        geo = self.edge_geo[self.tri_edges]
        flat_geo = geo.ravel()
        order = np.argsort(flat_geo, kind="stable")
        self._adj_ids = (order // 3).astype(np.int64)
        self._adj_ptr = np.searchsorted(flat_geo[order], np.arange(len(self.geo_edges) + 1))

    # -- sizes -----------------------------------------------------------------
    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_geo_edges(self) -> int:
        return len(self.geo_edges)

    @property
    def n_vertices(self) -> int:
        return self._n_vert

    def __len__(self):
        return self.n_triangles

    def __repr__(self):
        return (f"TriangleDictionary(V={self.n_vertices}, N={self.n_triangles}, "
                f"M={self.n_edges})")

    # -- lookups ---------------------------------------------------------------
    def edge_id(self, tail, head):
        """Oriented edge ids for ``tail -> head``; raises KeyError if absent."""
        key = np.asarray(tail, dtype=np.int64) * self._n_vert + np.asarray(head, dtype=np.int64)
        pos = np.searchsorted(self._edge_keys, key)
        pos_c = np.minimum(pos, len(self._edge_keys) - 1)
        if np.any(self._edge_keys[pos_c] != key):
            raise KeyError(f"edge {tail}->{head} not in dictionary")
        return pos_c if pos_c.ndim else int(pos_c)

    def triangle_id(self, v0, v1, v2) -> int:
        """Id of the oriented triangle ``(v0, v1, v2)`` (any rotation)."""
        t = [int(v0), int(v1), int(v2)]
        r = t.index(min(t))
        t = t[r:] + t[:r]
        key = (t[0] * self._n_vert + t[1]) * self._n_vert + t[2]
        pos = int(np.searchsorted(self._tri_keys, key))
        if pos >= len(self._tri_keys) or self._tri_keys[pos] != key:
            raise KeyError(f"triangle {tuple(t)} not in dictionary")
        return pos

    def geo_edge_id(self, a, b) -> int:
        return int(self.edge_geo[self.edge_id(a, b)])

    def triangle(self, i) -> OrientedTriangle:
        return OrientedTriangle(int(i), tuple(int(v) for v in self.triangles[i]))

    def edge(self, i) -> OrientedEdge:
        return OrientedEdge(int(i), tuple(int(v) for v in self.edges[i]))

    def triangles_on(self, geo_edge) -> np.ndarray:
        """Triangle ids containing a geometric edge, ascending."""
        lo, hi = self._adj_ptr[geo_edge], self._adj_ptr[geo_edge + 1]
        return np.sort(self._adj_ids[lo:hi])

    @cached_property
    def adjacency(self) -> dict[tuple[int, int], tuple[int, ...]]:
        """Unoriented edge ``(a, b)`` with ``a < b`` -> triangles containing it."""
        return {
            (int(a), int(b)): tuple(int(t) for t in self.triangles_on(g))
            for g, (a, b) in enumerate(self.geo_edges)
        }

    def traversal(self, tri, geo_edge) -> int:
        """+1 if triangle ``tri`` runs along ``geo_edge`` from low to high vertex."""
        for e in self.tri_edges[tri]:
            if self.edge_geo[e] == geo_edge:
                return int(self.edge_sign[e])
        raise KeyError(f"triangle {tri} does not contain geometric edge {geo_edge}")

    def vertex_coords(self, tri) -> np.ndarray:
        return self.points[self.triangles[tri]]

    def subset(self, triangle_ids) -> "TriangleDictionary":
        """Dictionary restricted to the geometric triangles of ``triangle_ids``.

        Both orientations of every selected triangle are kept; vertices are
        renumbered densely in their original order.
        """
        tri = self.triangles[np.asarray(triangle_ids, dtype=np.int64)]
        used = np.unique(tri)
        remap = np.full(self.n_vertices, -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        lattice = None if self.lattice is None else self.lattice[used]
        return TriangleDictionary(self.points[used], remap[tri], spec=self.spec, lattice=lattice)


def generate_dictionary(spec: LatticeSpec, points=None) -> TriangleDictionary:
    """Build every admissible oriented triangle for ``spec``.

    ``points`` optionally restricts the vertex set to a subset of lattice
    points (integer coordinates); by default the whole bounding box is used.
    """
    if spec.max_edge_len < 1:
        raise EmptyDictionaryError(
            f"empty dictionary: max_edge_len={spec.max_edge_len} < 1 admits no lattice edge")
    lattice = spec.lattice_points() if points is None else np.asarray(points, dtype=np.int64)
    lattice = lattice[_lex_order(lattice)]
    max_sq = spec.max_edge_len ** 2 + _LEN_TOL
    triples = enumerate_triples(np.ascontiguousarray(lattice), max_sq)
    if len(triples) == 0:
        raise EmptyDictionaryError(f"empty dictionary for {spec}")
    return TriangleDictionary(lattice * spec.epsilon, triples, spec=spec, lattice=lattice)


def adjacent_pairs(dictionary: TriangleDictionary, consistent: bool = True) -> np.ndarray:
    """Unordered pairs of triangles sharing a geometric edge.

    Returns an int array of rows ``(i, j, g)`` with ``i < j`` and ``g`` the
    geometric edge id. A triangle and its own reversal never form a pair.
    With ``consistent`` (the default) only pairs running along ``g`` in
    opposite directions are listed, i.e. pairs that can sit side by side in
    an oriented surface.
    """
    d = dictionary
    geo = d.edge_geo[d.tri_edges]
    sign = d.edge_sign[d.tri_edges]
    flat_geo = geo.ravel()
    order = np.argsort(flat_geo, kind="stable")
    tri_sorted = (order // 3).astype(np.int64)
    sign_sorted = sign.ravel()[order]
    ptr = d._adj_ptr
    sizes = np.diff(ptr)

    out = []
    for k in np.unique(sizes):
        if k < 2:
            continue
        groups = np.flatnonzero(sizes == k)
        iu, ju = np.triu_indices(k, 1)
        base = ptr[groups][:, None]
        ti = tri_sorted[base + iu]
        tj = tri_sorted[base + ju]
        keep = d.tri_opposite[ti] != tj
        if consistent:
            keep &= sign_sorted[base + iu] != sign_sorted[base + ju]
        g = np.broadcast_to(groups[:, None], ti.shape)
        lo = np.minimum(ti, tj)
        hi = np.maximum(ti, tj)
        out.append(np.column_stack([lo[keep], hi[keep], g[keep]]))
    if not out:
        return np.empty((0, 3), dtype=np.int64)
    pairs = np.concatenate(out).astype(np.int64)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0], pairs[:, 2]))]


def write_dictionary(dictionary: TriangleDictionary, fh) -> None:
    """Text dump: ``V id i j k``, ``T id v1 v2 v3``, ``E id a b`` records."""
    d = dictionary
    if d.spec is not None:
        nx, ny, nz = d.spec.bounding_box
        fh.write(f"# resolution {d.spec.resolution_n} box {nx} {ny} {nz} "
                 f"max_edge {d.spec.max_edge_len!r}\n")
    fh.write(f"# V {d.n_vertices} N {d.n_triangles} M {d.n_edges}\n")
    coords = d.lattice if d.lattice is not None else d.points
    for i, p in enumerate(coords):
        fh.write(f"V {i} {' '.join(repr(x) if isinstance(x, float) else str(x) for x in p.tolist())}\n")
    for i, (a, b, c) in enumerate(d.triangles.tolist()):
        fh.write(f"T {i} {a} {b} {c}\n")
    for i, (a, b) in enumerate(d.edges.tolist()):
        fh.write(f"E {i} {a} {b}\n")


def read_dictionary(fh) -> TriangleDictionary:
    """Inverse of :func:`write_dictionary`; checks ids against regeneration."""
    spec = None
    verts, tris, edges = {}, {}, {}
    for lineno, raw in enumerate(fh, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            tok = line[1:].split()
            if tok and tok[0] == "resolution":
                spec = LatticeSpec(int(tok[1]), (int(tok[3]), int(tok[4]), int(tok[5])), float(tok[7]))
            continue
        tok = line.split()
        try:
            kind, idx = tok[0], int(tok[1])
            if kind == "V" and len(tok) == 5:
                verts[idx] = [float(t) for t in tok[2:]]
            elif kind == "T" and len(tok) == 5:
                tris[idx] = [int(t) for t in tok[2:]]
            elif kind == "E" and len(tok) == 4:
                edges[idx] = [int(t) for t in tok[2:]]
            else:
                raise ValueError
        except (ValueError, IndexError):
            raise ValueError(f"line {lineno}: malformed dictionary record {line!r}") from None
    pts = np.array([verts[i] for i in range(len(verts))], dtype=np.float64)
    tri = np.array([tris[i] for i in range(len(tris))], dtype=np.int64)
    integral = np.all(pts == np.round(pts))
    lattice = pts.astype(np.int64) if integral and spec is not None else None
    points = pts * spec.epsilon if lattice is not None else pts
    d = TriangleDictionary(points, tri, spec=spec, lattice=lattice)
    if not np.array_equal(d.triangles, tri):
        raise ValueError("triangle records are not in canonical order")
    if edges and not np.array_equal(d.edges, np.array([edges[i] for i in range(len(edges))])):
        raise ValueError("edge records disagree with the triangles")
    return d
