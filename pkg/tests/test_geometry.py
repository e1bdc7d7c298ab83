import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import area_gradient_fd, fold_points, random_rotation
from willmore_ilp.geometry import (AREA, CONSTANT, WILLMORE, DegenerateHingeError,
                                   NonManifoldEdgeError, energy_edge_term, hinge, hinge_from_points,
                                   mean_curvature_edge, mean_curvature_pointwise, mesh_energy,
                                   willmore_edge_term)
from willmore_ilp.lattice import LatticeSpec, TriangleDictionary, generate_dictionary


def normal_angle(p, q, a, b):
    """Dihedral angle from the two consistently oriented face normals."""
    n1 = np.cross(q - p, a - p)
    n2 = np.cross(p - q, b - q)
    c = np.dot(n1, n2) / (np.linalg.norm(n1) * np.linalg.norm(n2))
    return math.pi - math.acos(np.clip(c, -1, 1))


def test_flat_square():
    p, q = np.array([1.0, 0, 0]), np.array([0.0, 1, 0])
    h = hinge_from_points(p, q, np.array([1.0, 1, 0]), np.zeros(3))
    assert h.dihedral_angle == pytest.approx(math.pi)
    assert abs(abs(h.bisecting_normal[2]) - 1) < 1e-15
    assert np.array_equal(mean_curvature_edge(h), np.zeros(3))
    assert np.array_equal(mean_curvature_pointwise(h), np.zeros(3))
    assert willmore_edge_term(h) == 0.0
    assert energy_edge_term(h, WILLMORE) == 0.0


def test_right_angle_fold_values():
    p, q, a, b = fold_points()
    h = hinge_from_points(p, q, a, b)
    assert h.dihedral_angle == pytest.approx(math.pi / 2, abs=1e-15)
    assert h.dihedral_angle == pytest.approx(normal_angle(p, q, a, b), abs=1e-12)
    assert np.linalg.norm(mean_curvature_edge(h)) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)
    assert np.linalg.norm(mean_curvature_pointwise(h)) == pytest.approx(3 * math.sqrt(2) / 2, rel=1e-15)
    assert willmore_edge_term(h) == pytest.approx(1.5, rel=1e-15)
    assert energy_edge_term(h, WILLMORE) == pytest.approx(1.5, rel=1e-14)
    assert energy_edge_term(h, CONSTANT) == pytest.approx(h.total_area / 3, rel=1e-15)
    assert energy_edge_term(h, AREA) == 0.0


def test_fold_gradient_matches_finite_differences():
    p, q, a, b = fold_points()
    h = hinge_from_points(p, q, a, b)
    g = area_gradient_fd(p, q, a, b, 0.5 * (p + q))
    assert np.allclose(mean_curvature_edge(h), g, rtol=0, atol=1e-8)


def test_pointwise_is_edge_times_three_over_area():
    p, q, a, b = fold_points()
    h = hinge_from_points(p, q, a, b)
    assert np.allclose(mean_curvature_pointwise(h), mean_curvature_edge(h) * 3 / h.total_area, atol=1e-15)


def test_swap_symmetry_and_mirror():
    p, q = np.zeros(3), np.array([1.0, 0, 0])
    a, b = np.array([0.3, 1.0, 0.2]), np.array([0.6, -1.0, 0.2])
    h1 = hinge_from_points(p, q, a, b)
    h2 = hinge_from_points(q, p, b, a)
    assert h1.dihedral_angle == pytest.approx(h2.dihedral_angle, abs=1e-14)
    assert willmore_edge_term(h1) == pytest.approx(willmore_edge_term(h2), rel=1e-14)
    assert np.allclose(mean_curvature_edge(h1), mean_curvature_edge(h2), atol=1e-14)


def test_back_to_back_is_degenerate():
    p, q, a = np.zeros(3), np.array([1.0, 0, 0]), np.array([0.0, 1, 0])
    h = hinge_from_points(p, q, a, np.array([0.5, 2.0, 0]))
    assert h.degenerate
    with pytest.raises(DegenerateHingeError):
        mean_curvature_edge(h)
    with pytest.raises(DegenerateHingeError):
        willmore_edge_term(h)


finite = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
vec = arrays(np.float64, 3, elements=finite)


def _regular(p, q, a, b):
    try:
        h = hinge_from_points(p, q, a, b)
    except ValueError:
        return None
    # keep hinges well away from the fold-back singularity for FD accuracy
    if h.degenerate or h.dihedral_angle < 0.05:
        return None
    e = np.linalg.norm(q - p)
    hi = np.linalg.norm(np.cross(q - p, a - p)) / e
    hj = np.linalg.norm(np.cross(q - p, b - p)) / e
    if e < 0.1 or hi < 0.1 or hj < 0.1:
        return None
    return h


@settings(max_examples=100, deadline=None)
@given(vec, vec, vec, vec, st.floats(0.1, 0.9))
def test_gradient_identity(p, q, a, b, s):
    h = _regular(p, q, a, b)
    if h is None:
        return
    m = p + s * (q - p)
    g = area_gradient_fd(p, q, a, b, m)
    H = mean_curvature_edge(h)
    assert np.linalg.norm(H - g) <= 1e-5 * max(np.linalg.norm(g), 1e-3)


@settings(max_examples=60, deadline=None)
@given(vec, vec, vec, vec, st.sampled_from([0.5, 2.0, 10.0]))
def test_scaling_laws(p, q, a, b, lam):
    h = _regular(p, q, a, b)
    if h is None:
        return
    hs = hinge_from_points(lam * p, lam * q, lam * a, lam * b)
    H, Hs = mean_curvature_edge(h), mean_curvature_edge(hs)
    P, Ps = mean_curvature_pointwise(h), mean_curvature_pointwise(hs)
    assert np.linalg.norm(Hs - lam * H) <= 1e-12 * max(np.linalg.norm(lam * H), 1e-300) + 1e-300
    assert np.linalg.norm(Ps - P / lam) <= 1e-12 * max(np.linalg.norm(P / lam), 1e-300) + 1e-300


@settings(max_examples=60, deadline=None)
@given(vec, vec, vec, vec)
def test_willmore_term_consistency(p, q, a, b):
    h = _regular(p, q, a, b)
    if h is None:
        return
    P = mean_curvature_pointwise(h)
    expected = float(P @ P) * h.total_area / 3
    assert willmore_edge_term(h) == pytest.approx(expected, rel=1e-12, abs=1e-300)
    assert energy_edge_term(h, WILLMORE) == pytest.approx(expected, rel=1e-12, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(vec, vec, vec, vec, st.integers(0, 2**31 - 1), vec)
def test_rigid_motion_invariance(p, q, a, b, seed, shift):
    h = _regular(p, q, a, b)
    if h is None:
        return
    R = random_rotation(np.random.default_rng(seed))
    moved = [R @ v + shift for v in (p, q, a, b)]
    hm = hinge_from_points(*moved)
    assert hm.dihedral_angle == pytest.approx(h.dihedral_angle, abs=1e-10)
    assert willmore_edge_term(hm) == pytest.approx(willmore_edge_term(h), rel=1e-10, abs=1e-10)
    assert np.allclose(mean_curvature_edge(hm), R @ mean_curvature_edge(h), atol=1e-10)


# -- mesh energy on dictionaries ---------------------------------------------------

def fold_dictionary():
    p, q, a, b = fold_points()
    d = TriangleDictionary(np.array([p, q, a, b]), [[0, 1, 2], [0, 1, 3]])
    return d, [d.triangle_id(0, 1, 2), d.triangle_id(1, 0, 3)]


def test_mesh_energy_fold():
    d, tris = fold_dictionary()
    assert mesh_energy(tris, d, WILLMORE) == pytest.approx(1.5, rel=1e-15)
    assert mesh_energy(tris, d, AREA) == pytest.approx(1.0, rel=1e-15)
    i, j = tris
    assert hinge(d, i, j).dihedral_angle == pytest.approx(math.pi / 2)


def test_mesh_energy_flat_disc():
    d = generate_dictionary(LatticeSpec(1, (2, 2, 0)))
    # fan of 8 consistently oriented triangles around the centre vertex
    c = 4
    ring = [0, 1, 2, 5, 8, 7, 6, 3]
    tris = [d.triangle_id(c, ring[k], ring[(k + 1) % 8]) for k in range(8)]
    assert mesh_energy(tris, d, WILLMORE) == 0.0


def test_constant_integrand_gives_area_on_closed_mesh():
    d = generate_dictionary(LatticeSpec(1, (1, 1, 1)))
    o, x, y, z = 0, 4, 2, 1   # lattice order: (0,0,0), (0,0,1)=1, (0,1,0)=2, (1,0,0)=4
    faces = [(o, y, x), (o, x, z), (o, z, y), (x, y, z)]
    tris = [d.triangle_id(*f) for f in faces]
    area = sum(0.5 * np.linalg.norm(np.cross(d.points[b] - d.points[a], d.points[c] - d.points[a]))
               for a, b, c in faces)
    assert mesh_energy(tris, d, CONSTANT) == pytest.approx(area, rel=1e-14)
    assert mesh_energy(tris, d, AREA) == pytest.approx(area, rel=1e-14)


def test_non_manifold_edge_needs_explicit_hinges():
    d = generate_dictionary(LatticeSpec(1, (1, 1, 1)))
    g = d.geo_edge_id(0, 4)
    by_apex = {}
    for t in d.triangles_on(g):
        apex = (set(d.triangles[t].tolist()) - {0, 4}).pop()
        by_apex.setdefault(apex, int(t))
    tris = list(by_apex.values())[:3]
    with pytest.raises(NonManifoldEdgeError):
        mesh_energy(tris, d, WILLMORE)
    total = mesh_energy(tris, d, WILLMORE, hinges=[(tris[0], tris[1])])
    assert total == pytest.approx(willmore_edge_term(hinge(d, tris[0], tris[1])))
