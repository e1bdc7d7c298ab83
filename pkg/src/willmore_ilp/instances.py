"""Ready-made boundary problems on lattice dictionaries."""

from __future__ import annotations

import numpy as np

from .constraints import BoundaryProblem
from .lattice import LatticeSpec, TriangleDictionary, generate_dictionary


def vertex_at(dictionary: TriangleDictionary, ijk) -> int:
    """Vertex id of the lattice point with integer coordinates ``ijk``."""
    hit = np.flatnonzero(np.all(dictionary.lattice == np.asarray(ijk), axis=1))
    if len(hit) == 0:
        raise KeyError(f"lattice point {tuple(ijk)} not in dictionary")
    return int(hit[0])


def square_loop(side: int, z: int = 0, origin=(0, 0)) -> list[tuple[int, int, int]]:
    """Counter-clockwise unit-step loop around a ``side`` x ``side`` square."""
    x0, y0 = origin
    pts = [(x0 + i, y0, z) for i in range(side)]
    pts += [(x0 + side, y0 + i, z) for i in range(side)]
    pts += [(x0 + side - i, y0 + side, z) for i in range(side)]
    pts += [(x0, y0 + side - i, z) for i in range(side)]
    return pts


def loop_problem(dictionary: TriangleDictionary, loop, conormal, label="") -> BoundaryProblem:
    """Boundary along lattice loop ``loop`` with one conormal triangle per step.

    ``conormal`` gives, per step ``a -> b`` (or one vector for all steps), the
    lattice offset ``v`` such that the fixed triangle is ``(a, b, b + v)``.
    Steps already run along by an earlier fixed triangle are skipped; when
    ``(a, b, b + v)`` would hold an already held edge, ``(a, b, a + v)`` is
    tried instead.
    """
    ids = [vertex_at(dictionary, p) for p in loop]
    steps = list(zip(loop, loop[1:] + loop[:1]))
    offsets = [conormal] * len(steps) if np.ndim(conormal) == 1 else list(conormal)
    fixed = []
    held = set()
    for (a, b), v in zip(steps, offsets):
        ia, ib = vertex_at(dictionary, a), vertex_at(dictionary, b)
        if dictionary.edge_id(ia, ib) in held:
            continue
        for base in (b, a):
            c = tuple(int(x) for x in np.asarray(base) + np.asarray(v))
            t = dictionary.triangle_id(ia, ib, vertex_at(dictionary, c))
            if not held.intersection(dictionary.tri_edges[t].tolist()):
                break
        else:
            raise ValueError(f"no conflict-free conormal triangle for step {a} -> {b}")
        fixed.append(t)
        held.update(dictionary.tri_edges[t].tolist())
    return BoundaryProblem.from_loops(dictionary, [ids], fixed, label=label)


DIRECTIONS = ("up", "down", "in", "out")


def direction_offsets(loop, tokens) -> list[tuple[int, int, int]]:
    """Lattice offsets for named conormal directions, one per step ``a -> b``.

    ``up``/``down`` are +-z, ``in`` is the step turned a quarter turn
    counter-clockwise about z (inward for a counter-clockwise loop), ``out``
    the opposite. Tuples pass through; a single token applies to all steps.
    """
    steps = list(zip(loop, loop[1:] + loop[:1]))
    tokens = list(tokens)
    if len(tokens) == 1:
        tokens = tokens * len(steps)
    if len(tokens) != len(steps):
        raise ValueError(f"{len(tokens)} conormal entries for {len(steps)} boundary steps")
    out = []
    for (a, b), tok in zip(steps, tokens):
        if not isinstance(tok, str):
            out.append(tuple(int(v) for v in tok))
            continue
        dx, dy = b[0] - a[0], b[1] - a[1]
        table = {"up": (0, 0, 1), "down": (0, 0, -1), "in": (-dy, dx, 0), "out": (dy, -dx, 0)}
        if tok not in table:
            raise ValueError(f"unknown conormal direction {tok!r}")
        out.append(table[tok])
    return out


def square_instance(resolution: int, conormal: str = "flat", height: int | None = None,
                    max_edge: float = float(np.sqrt(2.0))):
    """Unit square boundary at ``z = 0`` sampled at ``resolution``.

    ``conormal='flat'`` pins inward horizontal triangles, so the flat square
    is optimal. ``'up'`` pins vertical triangles, so the surface has to rise
    before it can close (a cup). ``height`` is the box height in lattice
    units (default ``resolution``).
    """
    n = int(resolution)
    h = n if height is None else int(height)
    spec = LatticeSpec(n, (n, n, h), max_edge)
    d = generate_dictionary(spec)
    loop = square_loop(n)
    if conormal not in ("flat", "up"):
        raise ValueError(f"unknown conormal kind {conormal!r}")
    offsets = direction_offsets(loop, ["in" if conormal == "flat" else "up"])
    return d, loop_problem(d, loop, offsets, label=f"square-{conormal}-n{n}")
