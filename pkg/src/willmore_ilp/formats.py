"""Text formats: triplets, free MPS, instance files, meshes, weight tables.

Every reader reports malformed input as :class:`FormatError` carrying the
offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .solver.lp import LinearProgram


class FormatError(ValueError):
    def __init__(self, message, lineno=None, source=None):
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
        self.message = message
        self.lineno = lineno


def _lines(fh):
    """Yield ``(lineno, stripped line)`` skipping blanks and ``#`` comments."""
    for lineno, raw in enumerate(fh, 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _num(tok, lineno, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise FormatError(f"expected {kind.__name__}, got {tok!r}", lineno) from None


# -- sparse integer triplets -----------------------------------------------------

def write_triplets(matrix, fh) -> None:
    """``rows cols nnz`` header, then one ``i j value`` line per nonzero."""
    coo = sp.coo_array(matrix)
    order = np.lexsort((coo.col, coo.row))
    fh.write(f"{coo.shape[0]} {coo.shape[1]} {len(order)}\n")
    for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        fh.write(f"{i} {j} {int(v)}\n")


def read_triplets(fh) -> sp.csc_array:
    it = _lines(fh)
    try:
        lineno, header = next(it)
    except StopIteration:
        raise FormatError("empty triplet file") from None
    parts = header.split()
    if len(parts) != 3:
        raise FormatError("header must be 'rows cols nnz'", lineno)
    m, n, nnz = (_num(p, lineno, int) for p in parts)
    rows, cols, vals = [], [], []
    for lineno, line in it:
        parts = line.split()
        if len(parts) != 3:
            raise FormatError("expected 'i j value'", lineno)
        i, j, v = (_num(p, lineno, int) for p in parts)
        if not (0 <= i < m and 0 <= j < n):
            raise FormatError(f"index ({i}, {j}) outside {m}x{n}", lineno)
        rows.append(i)
        cols.append(j)
        vals.append(v)
    if len(vals) != nnz:
        raise FormatError(f"header announces {nnz} entries, found {len(vals)}")
    return sp.csc_array((np.array(vals, dtype=np.int64), (rows, cols)), shape=(m, n))


# -- free MPS --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def write_mps(lp: LinearProgram, fh, integer: bool = False) -> None:
    """Free-format MPS with equality rows.

    With ``integer`` the integer columns are wrapped in ``MARKER`` blocks and
    0/1 columns get ``BV`` bounds; the plain LP export has neither.
    """
    A = sp.csc_array(lp.A)
    fh.write(f"NAME {lp.name}\n")
    fh.write("ROWS\n N obj\n")
    for name in lp.row_names:
        fh.write(f" E {name}\n")
    fh.write("COLUMNS\n")
    in_block = False
    for j, name in enumerate(lp.var_names):
        want = integer and bool(lp.integer[j])
        if want != in_block:
            fh.write(f" M{j} 'MARKER' {'INTORG' if want else 'INTEND'}\n")
            in_block = want
        fh.write(f" {name} obj {_fmt(lp.c[j])}\n")
        s, e = A.indptr[j], A.indptr[j + 1]
        for i, v in zip(A.indices[s:e], A.data[s:e]):
            fh.write(f" {name} {lp.row_names[i]} {_fmt(v)}\n")
    if in_block:
        fh.write(f" M{len(lp.var_names)} 'MARKER' INTEND\n")
    fh.write("RHS\n")
    for name, v in zip(lp.row_names, lp.b):
        if v != 0:
            fh.write(f" rhs {name} {_fmt(v)}\n")
    fh.write("BOUNDS\n")
    for j, name in enumerate(lp.var_names):
        lo, hi = lp.lower[j], lp.upper[j]
        if integer and lp.integer[j] and lo == 0 and hi == 1:
            fh.write(f" BV bnd {name}\n")
        elif lo == hi:
            fh.write(f" FX bnd {name} {_fmt(lo)}\n")
        else:
            fh.write(f" LO bnd {name} {_fmt(lo)}\n")
            if math.isinf(hi):
                fh.write(f" PL bnd {name}\n")
            else:
                fh.write(f" UP bnd {name} {_fmt(hi)}\n")
    fh.write("ENDATA\n")


def read_mps(fh) -> LinearProgram:
    """Read the free-MPS subset written by :func:`write_mps`."""
    name = "lp"
    section = None
    obj_row = None
    rows: dict[str, int] = {}
    row_names: list[str] = []
    cols: dict[str, int] = {}
    var_names: list[str] = []
    costs: dict[int, float] = {}
    entries: list[tuple[int, int, float]] = []
    rhs: dict[int, float] = {}
    integer: set[int] = set()
    bounds: dict[int, list[float]] = {}
    in_marker = False

    def col_index(cname):
        if cname not in cols:
            cols[cname] = len(var_names)
            var_names.append(cname)
        return cols[cname]

    for lineno, raw in enumerate(fh, 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        parts = line.split()
        if not line[0].isspace():
            section = parts[0].upper()
            if section == "NAME":
                name = parts[1] if len(parts) > 1 else name
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS"):
                raise FormatError(f"unsupported section {parts[0]!r}", lineno)
            continue
        if section == "ROWS":
            if len(parts) != 2:
                raise FormatError("expected '<type> <row>'", lineno)
            kind, rname = parts[0].upper(), parts[1]
            if kind == "N":
                if obj_row is not None:
                    raise FormatError("second objective row", lineno)
                obj_row = rname
            elif kind == "E":
                rows[rname] = len(row_names)
                row_names.append(rname)
            else:
                raise FormatError(f"only equality rows are supported, got {kind!r}", lineno)
        elif section == "COLUMNS":
            if len(parts) == 3 and parts[1].strip("'\"").upper() == "MARKER":
                tag = parts[2].strip("'\"").upper()
                if tag not in ("INTORG", "INTEND"):
                    raise FormatError(f"bad marker {parts[2]!r}", lineno)
                in_marker = tag == "INTORG"
                continue
            if len(parts) not in (3, 5):
                raise FormatError("expected '<col> <row> <value> [<row> <value>]'", lineno)
            j = col_index(parts[0])
            if in_marker:
                integer.add(j)
            for rname, val in zip(parts[1::2], parts[2::2]):
                v = _num(val, lineno)
                if rname == obj_row:
                    costs[j] = v
                elif rname in rows:
                    entries.append((rows[rname], j, v))
                else:
                    raise FormatError(f"unknown row {rname!r}", lineno)
        elif section == "RHS":
            if len(parts) not in (3, 5):
                raise FormatError("expected '<set> <row> <value>'", lineno)
            for rname, val in zip(parts[1::2], parts[2::2]):
                if rname not in rows:
                    raise FormatError(f"unknown row {rname!r}", lineno)
                rhs[rows[rname]] = _num(val, lineno)
        elif section == "BOUNDS":
            if len(parts) < 3:
                raise FormatError("expected '<type> <set> <col> [value]'", lineno)
            kind, cname = parts[0].upper(), parts[2]
            if cname not in cols:
                raise FormatError(f"unknown column {cname!r}", lineno)
            j = cols[cname]
            lo_hi = bounds.setdefault(j, [0.0, math.inf])
            if kind == "BV":
                lo_hi[:] = [0.0, 1.0]
                integer.add(j)
            elif kind == "PL":
                lo_hi[1] = math.inf
            elif kind in ("LO", "UP", "FX"):
                if len(parts) != 4:
                    raise FormatError(f"{kind} bound needs a value", lineno)
                v = _num(parts[3], lineno)
                if kind in ("LO", "FX"):
                    lo_hi[0] = v
                if kind in ("UP", "FX"):
                    lo_hi[1] = v
            else:
                raise FormatError(f"unsupported bound type {kind!r}", lineno)
        else:
            raise FormatError("data line outside a section", lineno)

    n, m = len(var_names), len(row_names)
    r, c, v = zip(*entries) if entries else ((), (), ())
    A = sp.csr_array((np.array(v, dtype=float), (np.array(r, dtype=int), np.array(c, dtype=int))), shape=(m, n))
    lower = np.array([bounds.get(j, [0.0, math.inf])[0] for j in range(n)])
    upper = np.array([bounds.get(j, [0.0, math.inf])[1] for j in range(n)])
    return LinearProgram(
        c=np.array([costs.get(j, 0.0) for j in range(n)]),
        A=A,
        b=np.array([rhs.get(i, 0.0) for i in range(m)]),
        lower=lower,
        upper=upper,
        var_names=var_names,
        row_names=row_names,
        integer=np.array([j in integer for j in range(n)], dtype=bool),
        name=name,
    )


def export_lp_file(lp: LinearProgram, path, integer: bool = False) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        write_mps(lp, fh, integer=integer)
    return path


def import_lp_file(path) -> LinearProgram:
    with Path(path).open() as fh:
        return read_mps(fh)


# -- meshes ----------------------------------------------------------------------

@dataclass
class MeshFile:
    """Oriented triangles over a vertex list, with an optional value per face."""

    vertices: np.ndarray
    triangles: np.ndarray
    values: np.ndarray | None = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(self.triangles) and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise ValueError("triangle vertex index out of range")
        if self.values is not None:
            self.values = np.asarray(self.values, dtype=float)
            if len(self.values) != len(self.triangles):
                raise ValueError("one value per triangle expected")
            if np.any((self.values < 0) | (self.values > 1)):
                raise ValueError("values must lie in [0, 1]")

    @classmethod
    def from_solution(cls, dictionary, x, tol: float = 1e-7) -> "MeshFile":
        """Support of the triangle part of ``x``; fractional values are kept."""
        x = np.asarray(x, dtype=float)[: dictionary.n_triangles]
        keep = np.flatnonzero(x > tol)
        tri = dictionary.triangles[keep]
        used = np.unique(tri)
        remap = np.full(dictionary.n_vertices, -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        return cls(dictionary.points[used], remap[tri], np.clip(x[keep], 0.0, 1.0))

    def to_dictionary(self):
        from .lattice import TriangleDictionary

        d = TriangleDictionary(self.vertices, self.triangles)
        ids = np.array([d.triangle_id(*t) for t in self.triangles.tolist()], dtype=np.int64)
        return d, ids


def write_mesh(mesh: MeshFile, fh) -> None:
    has_values = mesh.values is not None
    fh.write("# willmore-ilp mesh\n")
    fh.write(f"vertices {len(mesh.vertices)}\n")
    for p in mesh.vertices:
        fh.write(" ".join(_fmt(v) for v in p) + "\n")
    fh.write(f"triangles {len(mesh.triangles)}{' values' if has_values else ''}\n")
    for k, t in enumerate(mesh.triangles):
        extra = f" {_fmt(mesh.values[k])}" if has_values else ""
        fh.write(f"{t[0]} {t[1]} {t[2]}{extra}\n")


def read_mesh(fh) -> MeshFile:
    it = _lines(fh)

    def header(word):
        try:
            lineno, line = next(it)
        except StopIteration:
            raise FormatError(f"missing '{word}' header") from None
        parts = line.split()
        if parts[0] != word or len(parts) not in (2, 3):
            raise FormatError(f"expected '{word} <count>'", lineno)
        if len(parts) == 3 and parts[2] != "values":
            raise FormatError(f"unexpected token {parts[2]!r}", lineno)
        return _num(parts[1], lineno, int), len(parts) == 3

    nv, _ = header("vertices")
    verts = []
    for _ in range(nv):
        try:
            lineno, line = next(it)
        except StopIteration:
            raise FormatError("file ends inside the vertex block") from None
        parts = line.split()
        if len(parts) != 3:
            raise FormatError("vertex needs three coordinates", lineno)
        verts.append([_num(p, lineno) for p in parts])
    nt, has_values = header("triangles")
    tris, vals = [], []
    width = 4 if has_values else 3
    for _ in range(nt):
        try:
            lineno, line = next(it)
        except StopIteration:
            raise FormatError("file ends inside the triangle block") from None
        parts = line.split()
        if len(parts) != width:
            raise FormatError(f"triangle line needs {width} fields", lineno)
        t = [_num(p, lineno, int) for p in parts[:3]]
        if min(t) < 0 or max(t) >= nv:
            raise FormatError(f"vertex index out of range in {t}", lineno)
        tris.append(t)
        if has_values:
            v = _num(parts[3], lineno)
            if not 0.0 <= v <= 1.0:
                raise FormatError(f"value {v} outside [0, 1]", lineno)
            vals.append(v)
    for lineno, _line in it:
        raise FormatError("trailing data after the triangle block", lineno)
    return MeshFile(np.array(verts).reshape(-1, 3), np.array(tris, dtype=np.int64).reshape(-1, 3),
                    np.array(vals) if has_values else None)


def write_obj(mesh: MeshFile, fh) -> None:
    """Wavefront OBJ; per-face values go into comments right before each face."""
    fh.write("# willmore-ilp mesh export\n")
    for p in mesh.vertices:
        fh.write("v " + " ".join(_fmt(v) for v in p) + "\n")
    for k, t in enumerate(mesh.triangles):
        if mesh.values is not None:
            fh.write(f"# value {_fmt(mesh.values[k])}\n")
        fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


# -- custom weight tables ----------------------------------------------------------

@dataclass
class WeightTable:
    """Explicit objective: ``T id cost`` and ``Q i j cost`` records.

    Triangles or quadrangles without a record cost nothing.
    """

    triangle: dict[int, float] = field(default_factory=dict)
    quadrangle: dict[tuple[int, int], float] = field(default_factory=dict)

    def objective(self, n_triangles: int, pairs) -> np.ndarray:
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 3)
        c = np.zeros(n_triangles + len(pairs))
        for t, v in self.triangle.items():
            if not 0 <= t < n_triangles:
                raise ValueError(f"weight for unknown triangle {t}")
            c[t] = v
        index = {(int(i), int(j)): k for k, (i, j, _) in enumerate(pairs)}
        for key, v in self.quadrangle.items():
            if key not in index:
                raise ValueError(f"weight for unknown quadrangle {key}")
            c[n_triangles + index[key]] = v
        return c


def read_weights(fh) -> WeightTable:
    table = WeightTable()
    for lineno, line in _lines(fh):
        parts = line.split()
        tag = parts[0].upper()
        if tag == "T" and len(parts) == 3:
            key = _num(parts[1], lineno, int)
            target = table.triangle
        elif tag == "Q" and len(parts) == 4:
            i, j = sorted((_num(parts[1], lineno, int), _num(parts[2], lineno, int)))
            key = (i, j)
            target = table.quadrangle
        else:
            raise FormatError("expected 'T <id> <cost>' or 'Q <i> <j> <cost>'", lineno)
        v = _num(parts[-1], lineno)
        if not (math.isfinite(v) and v >= 0):
            raise FormatError(f"cost must be finite and non-negative, got {v}", lineno)
        if key in target:
            raise FormatError(f"duplicate record for {parts[0]} {key}", lineno)
        target[key] = v
    return table


def write_weights(table: WeightTable, fh) -> None:
    for t, v in sorted(table.triangle.items()):
        fh.write(f"T {t} {_fmt(v)}\n")
    for (i, j), v in sorted(table.quadrangle.items()):
        fh.write(f"Q {i} {j} {_fmt(v)}\n")
