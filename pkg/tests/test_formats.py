import io

import numpy as np
import pytest
import scipy.sparse as sp

from oracles import fractional_instance
from willmore_ilp.formats import (FormatError, MeshFile, WeightTable, read_mesh, read_mps,
                                  read_triplets, read_weights, write_mesh, write_mps, write_obj,
                                  write_triplets, write_weights)
from willmore_ilp.geometry import WILLMORE, mesh_energy
from willmore_ilp.instance import format_instance, load_instance, parse_instance
from willmore_ilp.solver import lp_solve

INSTANCE = """\
[lattice]
resolution = 1
box = 1 1 1

[boundary]
square = 1 0
conormal = in
"""


def round_trip(write, read, obj, **kw):
    buf = io.StringIO()
    write(obj, buf, **kw)
    buf.seek(0)
    return read(buf), buf.getvalue()


def test_triplets_round_trip():
    a = sp.csc_array(np.array([[1, 0, -1], [0, 0, 0], [0, 1, 1]]))
    back, text = round_trip(write_triplets, read_triplets, a)
    assert text.splitlines()[0] == "3 3 4"
    assert np.array_equal(back.toarray(), a.toarray())


@pytest.mark.parametrize("text,line", [
    ("2 2 1\n0 5 1\n", 2),
    ("2 2 1\n0 x 1\n", 2),
    ("2 2\n", 1),
    ("2 2 1\n0 0 1 4\n", 2),
])
def test_triplet_errors(text, line):
    with pytest.raises(FormatError) as err:
        read_triplets(io.StringIO(text))
    assert err.value.lineno == line


def test_triplet_count_mismatch():
    with pytest.raises(FormatError, match="announces"):
        read_triplets(io.StringIO("2 2 2\n0 0 1\n"))


@pytest.mark.parametrize("integer", [False, True])
def test_mps_round_trip(integer):
    lp = fractional_instance()[3]
    back, text = round_trip(write_mps, read_mps, lp, integer=integer)
    assert ("MARKER" in text) == integer
    assert ("BV" in text) == integer
    assert back.var_names == lp.var_names and back.row_names == lp.row_names
    assert np.array_equal(back.c, lp.c)
    assert np.array_equal(back.A.toarray(), lp.A.toarray())
    assert np.array_equal(back.b, lp.b)
    assert np.array_equal(back.lower, lp.lower) and np.array_equal(back.upper, lp.upper)
    if integer:
        assert back.integer.all()
    assert lp_solve(back).objective_value == lp_solve(lp).objective_value


def test_mesh_round_trip_and_obj():
    mesh = MeshFile([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], [[0, 1, 2], [1, 0, 3]], [1.0, 0.5])
    back, text = round_trip(write_mesh, read_mesh, mesh)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.array_equal(back.values, mesh.values)
    buf = io.StringIO()
    write_obj(mesh, buf)
    lines = buf.getvalue().splitlines()
    assert sum(ln.startswith("v ") for ln in lines) == 4
    assert "f 2 1 4" in lines
    assert "# value 0.5" in lines


def test_mesh_to_dictionary_energy():
    mesh = MeshFile([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], [[0, 1, 2], [1, 0, 3]])
    d, ids = mesh.to_dictionary()
    assert mesh_energy(ids, d, WILLMORE) == pytest.approx(1.5)


@pytest.mark.parametrize("text,line,msg", [
    ("vertices 1\n0 0\ntriangles 0\n", 2, "three coordinates"),
    ("vertices 3\n0 0 0\n1 0 0\n0 1 0\ntriangles 1\n0 1 7\n", 6, "out of range"),
    ("vertices 3\n0 0 0\n1 0 0\n0 1 0\ntriangles 1 values\n0 1 2 1.5\n", 6, "outside"),
    ("vertices 3\n0 0 0\n1 0 0\n0 1 0\ntriangles 0\nextra\n", 6, "trailing"),
    ("verts 1\n", 1, "vertices"),
])
def test_mesh_errors(text, line, msg):
    with pytest.raises(FormatError, match=msg) as err:
        read_mesh(io.StringIO(text))
    assert err.value.lineno == line


def test_mesh_validation():
    with pytest.raises(ValueError):
        MeshFile([[0, 0, 0]], [[0, 1, 2]])
    with pytest.raises(ValueError):
        MeshFile([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]], [2.0])


def test_weights():
    table = WeightTable({0: 1.0, 3: 0.25}, {(1, 2): 2.0})
    back, _ = round_trip(write_weights, read_weights, table)
    assert back == table
    c = back.objective(4, [[1, 2, 0]])
    assert c.tolist() == [1.0, 0.0, 0.0, 0.25, 2.0]
    with pytest.raises(ValueError):
        back.objective(2, [[1, 2, 0]])
    assert read_weights(io.StringIO("Q 2 1 1\n")).quadrangle == {(1, 2): 1.0}


@pytest.mark.parametrize("text,line", [
    ("T 0 1\nT 0 2\n", 2),
    ("T 0 -1\n", 1),
    ("X 1 1\n", 1),
    ("T 0 1\nQ 1 2\n", 2),
])
def test_weight_errors(text, line):
    with pytest.raises(FormatError) as err:
        read_weights(io.StringIO(text))
    assert err.value.lineno == line


def test_instance_parse_and_round_trip():
    inst = parse_instance(INSTANCE)
    assert inst.lattice.bounding_box == (1, 1, 1)
    assert len(inst.loop) == 4 and inst.offsets() == [(0, 1, 0), (-1, 0, 0), (0, -1, 0), (1, 0, 0)]
    again = parse_instance(format_instance(inst))
    assert again.loop == inst.loop and again.offsets() == inst.offsets()
    assert again.lattice == inst.lattice and again.solver == inst.solver
    d, problem = inst.build()
    assert len(problem.boundary_edges) == 4


@pytest.mark.parametrize("patch,line,msg", [
    ("[lattice]\nfoo = 1\n", 2, "unknown key"),
    ("resolution = 1\n", 1, "outside any section"),
    ("[lattice]\nresolution = 1\n[nowhere]\n", 3, "unknown section"),
    ("[lattice]\nresolution = 1\nresolution = 2\n", 3, "duplicate"),
    ("[lattice]\nbox = 1 1\n", 2, "expected 3"),
])
def test_instance_errors(patch, line, msg):
    rest = "[boundary]\nsquare = 1 0\nconormal = in\n" if "box" in patch else INSTANCE
    text = patch + rest
    with pytest.raises(FormatError, match=msg) as err:
        parse_instance(text, source="x.inst")
    assert err.value.lineno == line
    assert str(err.value).startswith(f"x.inst:{line}:")


def test_instance_conormal_errors():
    with pytest.raises(FormatError, match="unknown conormal"):
        parse_instance(INSTANCE.replace("conormal = in", "conormal = sideways"))
    with pytest.raises(FormatError) as err:
        parse_instance(INSTANCE.replace("conormal = in", "conormal = in out"))
    assert err.value.lineno == 7


def test_instance_table_relative_path(tmp_path):
    (tmp_path / "w.txt").write_text("T 0 1\n")
    path = tmp_path / "a.inst"
    path.write_text(INSTANCE + "[energy]\nphi = table\ntable = w.txt\n")
    inst = load_instance(path)
    assert inst.table.triangle == {0: 1.0}
    path.write_text(INSTANCE + "[energy]\nphi = table\ntable = missing.txt\n")
    with pytest.raises(FormatError, match="cannot read"):
        load_instance(path)


def test_exported_file_solved_externally(tmp_path):
    from scipy.optimize import linprog

    from willmore_ilp.formats import export_lp_file, import_lp_file

    lp = fractional_instance()[3]
    back = import_lp_file(export_lp_file(lp, tmp_path / "f.mps"))
    ref = linprog(back.c, A_eq=back.A, b_eq=back.b, bounds=list(zip(back.lower, back.upper)),
                  method="highs")
    assert ref.status == 0
    assert lp_solve(lp).objective_value == pytest.approx(ref.fun, abs=1e-6)
