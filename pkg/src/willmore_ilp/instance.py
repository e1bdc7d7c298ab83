"""Instance files: line-oriented ``[section]`` / ``key = value`` text.

Example::

    [lattice]
    resolution = 2
    box = 2 2 2
    max_edge = 1.4142135623730951

    [boundary]
    square = 2 1          # side, height (lattice units); or: loop = x y z; x y z; ...
    conormal = in in down down in in in down

    [energy]
    phi = willmore        # willmore | area | constant | table
    # table = weights.txt (required for phi = table, relative to the file)

    [solver]
    tol_int = 1e-7
    node_limit = 100000
    seed = 0

Conormal tokens per boundary step ``a -> b``: ``up``/``down`` are +-z,
``in`` is the step rotated a quarter turn counter-clockwise about z, ``out``
the opposite; ``dx dy dz`` triples (separated by ``;``) give explicit lattice
offsets. A single token applies to every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .formats import FormatError, WeightTable, read_weights
from .geometry import INTEGRANDS
from .instances import DIRECTIONS, direction_offsets, loop_problem, square_loop
from .lattice import LatticeSpec, generate_dictionary

_SCHEMA = {
    "lattice": {"resolution", "box", "max_edge"},
    "boundary": {"square", "loop", "conormal"},
    "energy": {"phi", "table"},
    "solver": {"tol_int", "node_limit", "seed", "consistent", "presolve", "max_iter"},
}


@dataclass
class SolverOptions:
    tol_int: float = 1e-7
    node_limit: int = 100_000
    seed: int = 0
    consistent: bool = True
    presolve: bool = False
    max_iter: int = 50_000


@dataclass
class InstanceFile:
    lattice: LatticeSpec
    loop: list[tuple[int, int, int]]
    conormal: list
    phi: str = "willmore"
    table: WeightTable | None = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    source: str = ""

    def offsets(self) -> list[tuple[int, int, int]]:
        """One lattice offset per boundary step."""
        return direction_offsets(self.loop, self.conormal)

    def build(self):
        """``(dictionary, boundary problem)`` for this instance."""
        d = generate_dictionary(self.lattice)
        return d, loop_problem(d, self.loop, self.offsets(), label=self.source)


def _ints(text, lineno, count=None):
    try:
        vals = [int(t) for t in text.split()]
    except ValueError:
        raise FormatError(f"expected integers, got {text!r}", lineno) from None
    if count is not None and len(vals) != count:
        raise FormatError(f"expected {count} integers, got {len(vals)}", lineno)
    return vals


def _bool(text, lineno):
    t = text.lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise FormatError(f"expected a boolean, got {text!r}", lineno)


def parse_instance(text: str, source: str = "<string>", base_dir: Path | None = None) -> InstanceFile:
    section = None
    values: dict[tuple[str, str], tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise FormatError("unterminated section header", lineno, source)
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                raise FormatError(f"unknown section [{section}]", lineno, source)
            continue
        if section is None:
            raise FormatError("key outside any section", lineno, source)
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep:
            raise FormatError("expected 'key = value'", lineno, source)
        if key not in _SCHEMA[section]:
            raise FormatError(f"unknown key {key!r} in [{section}]", lineno, source)
        if (section, key) in values:
            raise FormatError(f"duplicate key {key!r} in [{section}]", lineno, source)
        values[(section, key)] = (value.strip(), lineno)

    def get(section, key, default=None):
        return values.get((section, key), (default, None))

    try:
        res, ln = get("lattice", "resolution", "1")
        resolution = _ints(res, ln, 1)[0]
        box_txt, ln_box = get("lattice", "box")
        if box_txt is None:
            raise FormatError("[lattice] needs 'box'", None, source)
        box = tuple(_ints(box_txt, ln_box, 3))
        me_txt, ln = get("lattice", "max_edge", repr(math.sqrt(2.0)))
        try:
            max_edge = float(me_txt)
        except ValueError:
            raise FormatError(f"bad max_edge {me_txt!r}", ln) from None
        try:
            lattice = LatticeSpec(resolution, box, max_edge)
        except ValueError as exc:
            raise FormatError(str(exc), ln_box) from None

        sq, ln_sq = get("boundary", "square")
        lp_txt, ln_loop = get("boundary", "loop")
        if (sq is None) == (lp_txt is None):
            raise FormatError("[boundary] needs exactly one of 'square' or 'loop'", ln_sq or ln_loop, source)
        if sq is not None:
            side, z = _ints(sq, ln_sq, 2)
            loop = square_loop(side, z)
        else:
            loop = [tuple(_ints(chunk, ln_loop, 3)) for chunk in lp_txt.split(";") if chunk.strip()]
            if len(loop) < 3:
                raise FormatError("a loop needs at least three vertices", ln_loop)

        cn_txt, ln_cn = get("boundary", "conormal")
        if cn_txt is None:
            raise FormatError("[boundary] needs 'conormal'", None, source)
        if ";" in cn_txt or cn_txt.split()[0].lstrip("-").isdigit():
            conormal = [tuple(_ints(chunk, ln_cn, 3)) for chunk in cn_txt.split(";") if chunk.strip()]
        else:
            conormal = cn_txt.lower().split()
            bad = [t for t in conormal if t not in DIRECTIONS]
            if bad:
                raise FormatError(f"unknown conormal direction {bad[0]!r}", ln_cn)

        phi, ln_phi = get("energy", "phi", "willmore")
        phi = phi.lower()
        table = None
        if phi == "table":
            path, ln_t = get("energy", "table")
            if path is None:
                raise FormatError("phi = table needs a 'table' path", ln_phi, source)
            p = Path(path)
            if not p.is_absolute() and base_dir is not None:
                p = base_dir / p
            try:
                with p.open() as fh:
                    table = read_weights(fh)
            except OSError as exc:
                raise FormatError(f"cannot read weight table: {exc}", ln_t) from None
        elif phi not in INTEGRANDS:
            raise FormatError(f"unknown phi {phi!r}", ln_phi)

        opts = SolverOptions()
        for key in ("tol_int",):
            txt, ln = get("solver", key)
            if txt is not None:
                try:
                    setattr(opts, key, float(txt))
                except ValueError:
                    raise FormatError(f"bad {key} {txt!r}", ln) from None
        for key in ("node_limit", "seed", "max_iter"):
            txt, ln = get("solver", key)
            if txt is not None:
                setattr(opts, key, _ints(txt, ln, 1)[0])
        for key in ("consistent", "presolve"):
            txt, ln = get("solver", key)
            if txt is not None:
                setattr(opts, key, _bool(txt, ln))
    except FormatError as exc:
        if source and not str(exc).startswith(source):
            raise FormatError(exc.message, exc.lineno, source) from None
        raise

    inst = InstanceFile(lattice, loop, conormal, phi, table, opts, source)
    try:
        inst.offsets()
    except ValueError as exc:
        raise FormatError(str(exc), ln_cn, source) from None
    return inst


def load_instance(path) -> InstanceFile:
    path = Path(path)
    return parse_instance(path.read_text(), source=str(path), base_dir=path.parent)


def format_instance(inst: InstanceFile) -> str:
    """Inverse of :func:`parse_instance` (weight tables are not inlined)."""
    lat = inst.lattice
    loop = "; ".join(" ".join(map(str, p)) for p in inst.loop)
    if all(isinstance(t, str) for t in inst.conormal):
        cn = " ".join(inst.conormal)
    else:
        cn = "; ".join(" ".join(map(str, t)) for t in inst.conormal)
    s = inst.solver
    return (
        "[lattice]\n"
        f"resolution = {lat.resolution_n}\n"
        f"box = {' '.join(map(str, lat.bounding_box))}\n"
        f"max_edge = {lat.max_edge_len!r}\n\n"
        "[boundary]\n"
        f"loop = {loop}\n"
        f"conormal = {cn}\n\n"
        "[energy]\n"
        f"phi = {inst.phi}\n\n"
        "[solver]\n"
        f"tol_int = {s.tol_int!r}\n"
        f"node_limit = {s.node_limit}\n"
        f"seed = {s.seed}\n"
        f"consistent = {str(s.consistent).lower()}\n"
        f"presolve = {str(s.presolve).lower()}\n"
        f"max_iter = {s.max_iter}\n"
    )
