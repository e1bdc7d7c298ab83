"""Hinge geometry and edge-based curvature energies.

A hinge is a pair of triangles glued along an edge ``e``. Its mean curvature
vector is ``|e| cos(theta/2) N_e`` where ``theta`` is the dihedral angle
(``pi`` when flat) and ``N_e`` the unit bisecting normal. The pointwise
version divides by a third of the hinge area, and an integrand ``phi`` is
integrated as ``sum_e (A_e / 3) phi(x_e, N_e, H_pw(e))``.

Conventions
-----------
* ``H = kappa_1 + kappa_2`` (no factor one half).
* ``theta`` is measured between the two half-planes, so it does not depend
  on how the triangles are oriented.
* ``N_e`` is collinear with the sum of the two triangle normals and points
  along the area gradient at the edge, which makes ``H(e)`` equal to that
  gradient. For a flat hinge it is the common normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

_DEGENERATE_COS = 1.0 - 1e-12
_TINY = 1e-14


class DegenerateHingeError(ValueError):
    """The two triangles fold onto each other (dihedral angle 0)."""


class NonManifoldEdgeError(ValueError):
    """More than two mesh triangles meet at an inner edge."""


def triangle_normal(p0, p1, p2) -> np.ndarray:
    n = np.cross(np.asarray(p1) - p0, np.asarray(p2) - p0)
    return n / np.linalg.norm(n)


def triangle_area(p0, p1, p2) -> float:
    return 0.5 * float(np.linalg.norm(np.cross(np.asarray(p1) - p0, np.asarray(p2) - p0)))


@dataclass(frozen=True)
class HingeGeometry:
    edge_len: float
    dihedral_angle: float
    bisecting_normal: np.ndarray
    total_area: float
    triangle_normals: tuple[np.ndarray, np.ndarray]
    midpoint: np.ndarray
    half_cos: float
    degenerate: bool = False

    def require_regular(self):
        if self.degenerate:
            raise DegenerateHingeError("degenerate hinge: triangles fold onto each other")


def hinge_from_points(p, q, apex_i, apex_j, normal_i=None, normal_j=None) -> HingeGeometry:
    """Hinge on edge ``p q`` with opposite vertices ``apex_i`` and ``apex_j``.

    Without explicit normals the triangles are taken as ``(p, q, apex_i)`` and
    ``(q, p, apex_j)``, i.e. consistently oriented.
    """
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    ci, cj = np.asarray(apex_i, dtype=float), np.asarray(apex_j, dtype=float)
    e = q - p
    length = float(np.linalg.norm(e))
    if not length > 0:
        raise ValueError("zero-length hinge edge")
    if normal_i is None and np.linalg.norm(np.cross(e, ci - p)) == 0:
        raise ValueError("zero-area triangle in hinge")
    if normal_j is None and np.linalg.norm(np.cross(e, cj - p)) == 0:
        raise ValueError("zero-area triangle in hinge")
    unit = e / length

    wi = (ci - p) - np.dot(ci - p, unit) * unit
    wj = (cj - p) - np.dot(cj - p, unit) * unit
    hi, hj = float(np.linalg.norm(wi)), float(np.linalg.norm(wj))
    if hi <= _TINY * length or hj <= _TINY * length:
        raise ValueError("zero-area triangle in hinge")
    wi, wj = wi / hi, wj / hj

    cos_t = float(np.dot(wi, wj))
    theta = float(np.arctan2(np.linalg.norm(np.cross(wi, wj)), cos_t))
    # outward conormals; their sum is the area gradient direction
    g = -(wi + wj)
    g_norm = float(np.linalg.norm(g))
    if g_norm < 1e-12:
        # flat up to rounding; keeps coplanar hinges exactly energy-free
        g_norm = 0.0

    ni = triangle_normal(p, q, ci) if normal_i is None else np.asarray(normal_i, dtype=float)
    nj = triangle_normal(q, p, cj) if normal_j is None else np.asarray(normal_j, dtype=float)
    if g_norm > 1e-12:
        bis = g / g_norm
    else:
        s = ni + nj
        s_norm = float(np.linalg.norm(s))
        bis = s / s_norm if s_norm > 1e-12 else ni.copy()

    return HingeGeometry(
        edge_len=length,
        dihedral_angle=theta,
        bisecting_normal=bis,
        total_area=0.5 * length * (hi + hj),
        triangle_normals=(ni, nj),
        midpoint=0.5 * (p + q),
        half_cos=0.5 * g_norm,
        degenerate=cos_t >= _DEGENERATE_COS,
    )


def shared_edge(dictionary, i, j) -> tuple[int, int]:
    """Vertex pair ``(a, b)``, ``a < b``, common to triangles ``i`` and ``j``."""
    common = sorted(set(dictionary.triangles[i].tolist()) & set(dictionary.triangles[j].tolist()))
    if len(common) != 2:
        raise ValueError(f"triangles {i} and {j} do not share exactly one edge")
    return common[0], common[1]


def hinge(dictionary, i, j, edge=None) -> HingeGeometry:
    """Geometry of the hinge formed by dictionary triangles ``i`` and ``j``."""
    a, b = shared_edge(dictionary, i, j) if edge is None else edge
    pts = dictionary.points
    ti, tj = dictionary.triangles[i], dictionary.triangles[j]
    ci = next(v for v in ti if v != a and v != b)
    cj = next(v for v in tj if v != a and v != b)
    return hinge_from_points(pts[a], pts[b], pts[ci], pts[cj],
                             triangle_normal(*pts[ti]), triangle_normal(*pts[tj]))


def mean_curvature_edge(h: HingeGeometry) -> np.ndarray:
    h.require_regular()
    return h.edge_len * h.half_cos * h.bisecting_normal


def mean_curvature_pointwise(h: HingeGeometry) -> np.ndarray:
    h.require_regular()
    return (3.0 * h.edge_len / h.total_area) * h.half_cos * h.bisecting_normal


# -- integrands ------------------------------------------------------------------

def _zero_tilde(tri_points, normal):
    return 0.0


@dataclass(frozen=True)
class IntegrandSpec:
    """Curvature integrand ``phi(x, n, H)`` plus per-triangle term ``phi_tilde``.

    ``phi_tilde`` receives the (3, 3) vertex coordinates of a triangle and its
    unit normal.
    """

    phi: Callable[[np.ndarray, np.ndarray, np.ndarray], float]
    phi_tilde: Callable[[np.ndarray, np.ndarray], float] = field(default=_zero_tilde)
    name: str = "custom"


def _squared_norm(x, n, H):
    return float(np.dot(H, H))


def _zero(x, n, H):
    return 0.0


def _one(x, n, H):
    return 1.0


def _tri_area(tri_points, normal):
    return triangle_area(*tri_points)


WILLMORE = IntegrandSpec(_squared_norm, name="willmore")
AREA = IntegrandSpec(_zero, _tri_area, name="area")
CONSTANT = IntegrandSpec(_one, name="constant")

INTEGRANDS = {"willmore": WILLMORE, "area": AREA, "constant": CONSTANT}


def energy_edge_term(h: HingeGeometry, integrand: IntegrandSpec) -> float:
    h.require_regular()
    value = float(integrand.phi(h.midpoint, h.bisecting_normal, mean_curvature_pointwise(h)))
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"integrand {integrand.name!r} returned {value}")
    return h.total_area / 3.0 * value


def willmore_edge_term(h: HingeGeometry) -> float:
    h.require_regular()
    return 3.0 * h.edge_len ** 2 / h.total_area * h.half_cos ** 2


def triangle_term(dictionary, tri, integrand: IntegrandSpec) -> float:
    pts = dictionary.points[dictionary.triangles[tri]]
    value = float(integrand.phi_tilde(pts, triangle_normal(*pts)))
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"triangle term of {integrand.name!r} returned {value}")
    return value


def hinge_terms(dictionary, pairs, integrand: IntegrandSpec):
    """Full hinge energy for each row ``(i, j, g)`` of ``pairs``.

    Returns ``(costs, degenerate)``; degenerate hinges get cost ``nan``.
    """
    costs = np.full(len(pairs), np.nan)
    degenerate = np.zeros(len(pairs), dtype=bool)
    willmore = integrand is WILLMORE
    for k, (i, j, g) in enumerate(np.asarray(pairs).tolist()):
        a, b = dictionary.geo_edges[g]
        h = hinge(dictionary, i, j, edge=(a, b))
        if h.degenerate:
            degenerate[k] = True
            continue
        costs[k] = willmore_edge_term(h) if willmore else energy_edge_term(h, integrand)
    return costs, degenerate


def degenerate_mask(dictionary, pairs) -> np.ndarray:
    """Boolean mask of pairs whose half-planes coincide (vectorised)."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 3)
    if len(pairs) == 0:
        return np.zeros(0, dtype=bool)
    pts = dictionary.points
    tri = dictionary.triangles
    ab = dictionary.geo_edges[pairs[:, 2]]
    p, q = pts[ab[:, 0]], pts[ab[:, 1]]
    unit = (q - p) / np.linalg.norm(q - p, axis=1)[:, None]

    def inward(t):
        verts = tri[t]
        apex = np.where((verts != ab[:, :1]) & (verts != ab[:, 1:]), verts, -1).max(axis=1)
        w = pts[apex] - p
        w = w - np.einsum("ij,ij->i", w, unit)[:, None] * unit
        return w / np.linalg.norm(w, axis=1)[:, None]

    return np.einsum("ij,ij->i", inward(pairs[:, 0]), inward(pairs[:, 1])) >= _DEGENERATE_COS


def mesh_energy(triangles, dictionary, integrand: IntegrandSpec, hinges=None) -> float:
    """Discrete ``W_phi`` of the mesh made of dictionary triangles ``triangles``.

    Inner edges are those shared by exactly two mesh triangles. Edges with
    more than two raise :class:`NonManifoldEdgeError` unless ``hinges``
    supplies the explicit list of glued pairs ``(i, j)`` (self-intersecting
    surfaces), in which case only those pairs are charged.
    """
    tris = sorted({int(t) for t in triangles})
    total = sum(triangle_term(dictionary, t, integrand) for t in tris)
    if hinges is not None:
        for i, j in hinges:
            total += energy_edge_term(hinge(dictionary, i, j), integrand)
        return total

    by_edge: dict[int, list[int]] = {}
    for t in tris:
        for e in dictionary.tri_edges[t]:
            by_edge.setdefault(int(dictionary.edge_geo[e]), []).append(t)
    for g, members in sorted(by_edge.items()):
        if len(members) == 2:
            a, b = dictionary.geo_edges[g]
            total += energy_edge_term(hinge(dictionary, members[0], members[1], edge=(a, b)), integrand)
        elif len(members) > 2:
            raise NonManifoldEdgeError(f"{len(members)} mesh triangles meet at edge {tuple(dictionary.geo_edges[g])}")
    return total
