import io
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from willmore_ilp.lattice import (EmptyDictionaryError, LatticeSpec, adjacent_pairs,
                                  generate_dictionary, read_dictionary, write_dictionary)


def brute_triangles(points, max_len):
    """Geometric triangles by scanning every triple."""
    out = []
    for a, b, c in itertools.combinations(range(len(points)), 3):
        p, q, r = (np.asarray(points[k], float) for k in (a, b, c))
        if max(np.linalg.norm(p - q), np.linalg.norm(q - r), np.linalg.norm(r - p)) > max_len + 1e-9:
            continue
        if np.linalg.norm(np.cross(q - p, r - p)) == 0:
            continue
        out.append((a, b, c))
    return out


def test_flat_unit_square_has_eight():
    d = generate_dictionary(LatticeSpec(1, (1, 1, 0)))
    assert d.n_triangles == 8
    assert d.n_vertices == 4


def test_unit_cube_count_matches_triple_scan():
    spec = LatticeSpec(1, (1, 1, 1))
    pts = spec.lattice_points()
    expected = 2 * len(brute_triangles(pts, math.sqrt(2)))
    d = generate_dictionary(spec)
    assert d.n_triangles == expected == 64


def test_short_edges_give_empty_dictionary():
    with pytest.raises(EmptyDictionaryError):
        generate_dictionary(LatticeSpec(1, (2, 2, 2), 0.5))


@pytest.mark.parametrize("bad", [dict(resolution_n=0), dict(bounding_box=(1, -1, 0)),
                                 dict(max_edge_len=0.0)])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        LatticeSpec(**bad)


def test_collinear_triples_excluded():
    # a 2x0x0 box only has collinear triples
    with pytest.raises(EmptyDictionaryError):
        generate_dictionary(LatticeSpec(1, (2, 0, 0), 2.0))


def test_coordinates_are_scaled():
    d = generate_dictionary(LatticeSpec(2, (1, 1, 0)))
    assert d.points.max() == pytest.approx(0.5)
    assert d.lattice.max() == 1


def test_square_diagonal_pair():
    d = generate_dictionary(LatticeSpec(1, (1, 1, 0)))
    pairs = adjacent_pairs(d)
    g = d.geo_edge_id(0, 3)
    on_diag = pairs[pairs[:, 2] == g]
    # both orientations of the two halves: (A, B') and (A', B)
    assert len(on_diag) == 2
    for i, j, _ in on_diag:
        assert set(d.triangles[i]) | set(d.triangles[j]) == {0, 1, 2, 3}
        assert d.traversal(i, g) != d.traversal(j, g)


def test_own_opposite_never_paired():
    d = generate_dictionary(LatticeSpec(1, (1, 1, 1)))
    for consistent in (True, False):
        pairs = adjacent_pairs(d, consistent=consistent)
        assert not np.any(d.tri_opposite[pairs[:, 0]] == pairs[:, 1])


def test_cube_pairs_match_quadratic_scan():
    d = generate_dictionary(LatticeSpec(1, (1, 1, 1)))
    expected_all, expected_consistent = set(), set()
    for i in range(d.n_triangles):
        for j in range(i + 1, d.n_triangles):
            shared = set(d.triangles[i].tolist()) & set(d.triangles[j].tolist())
            if len(shared) != 2 or d.tri_opposite[i] == j:
                continue
            g = d.geo_edge_id(*sorted(shared))
            expected_all.add((i, j, g))
            if d.traversal(i, g) != d.traversal(j, g):
                expected_consistent.add((i, j, g))
    assert set(map(tuple, adjacent_pairs(d, consistent=False).tolist())) == expected_all
    assert set(map(tuple, adjacent_pairs(d).tolist())) == expected_consistent


def check_structure(d):
    n, m = d.n_triangles, d.n_edges
    assert n % 2 == 0 and m % 2 == 0
    assert np.all(d.tri_opposite[d.tri_opposite] == np.arange(n))
    assert np.all(d.tri_opposite != np.arange(n))
    assert np.all(d.edge_opposite[d.edge_opposite] == np.arange(m))
    assert np.all(d.edge_opposite != np.arange(m))
    # orientation involution maps the triangle set onto itself
    rev = {tuple(np.roll(t[::-1], 1)) for t in d.triangles.tolist()}
    assert rev == {tuple(t) for t in d.triangles.tolist()}
    for t in range(n):
        tri = d.triangles[t]
        assert len(set(tri.tolist())) == 3
        p = d.points[tri]
        assert np.linalg.norm(np.cross(p[1] - p[0], p[2] - p[0])) > 0
        own = set(d.tri_edges[t].tolist())
        assert own == {d.edge_id(tri[k], tri[(k + 1) % 3]) for k in range(3)}
        assert set(d.edge_opposite[list(own)].tolist()).isdisjoint(own)
    # adjacency symmetry
    for (a, b), tris in d.adjacency.items():
        for t in tris:
            assert {a, b} <= set(d.triangles[t].tolist())
    for t in range(n):
        for e in d.tri_edges[t]:
            a, b = sorted(d.edges[e].tolist())
            assert t in d.adjacency[(a, b)]


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 2), st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 1)),
       st.sampled_from([1.0, math.sqrt(2), math.sqrt(3)]))
def test_dictionary_invariants(res, box, max_edge):
    spec = LatticeSpec(res, box, max_edge)
    try:
        d = generate_dictionary(spec)
    except EmptyDictionaryError:
        assert len(brute_triangles(spec.lattice_points(), max_edge)) == 0
        return
    assert d.n_triangles == 2 * len(brute_triangles(spec.lattice_points(), max_edge))
    check_structure(d)


def test_ids_are_lexicographic_and_deterministic():
    spec = LatticeSpec(1, (1, 1, 1))
    a, b = generate_dictionary(spec), generate_dictionary(spec)
    assert np.array_equal(a.triangles, b.triangles)
    assert np.array_equal(a.edges, b.edges)
    keys = [tuple(t) for t in a.triangles.tolist()]
    assert keys == sorted(keys)
    assert all(t[0] == min(t) for t in keys)


def test_dictionary_text_round_trip():
    d = generate_dictionary(LatticeSpec(2, (1, 1, 1)))
    buf = io.StringIO()
    write_dictionary(d, buf)
    back = read_dictionary(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.triangles, d.triangles)
    assert np.array_equal(back.edges, d.edges)
    assert np.array_equal(back.points, d.points)
