"""Pipeline helpers and the resolution-ladder experiment."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .constraints import build_pair_system
from .geometry import INTEGRANDS
from .instance import InstanceFile, SolverOptions
from .instances import direction_offsets, loop_problem, square_loop
from .lattice import LatticeSpec, generate_dictionary
from .solver import Status, build_lp, energy_weights, ilp_solve, lp_solve, round_check


def build_instance_lp(dictionary, problem, phi="willmore", table=None, options=None):
    """Pair-form system and its LP for one boundary problem."""
    options = options or SolverOptions()
    system = build_pair_system(dictionary, problem, consistent=options.consistent,
                               presolve=options.presolve)
    if phi == "table":
        weights = table.objective(dictionary.n_triangles, system.pairs)
    else:
        weights = energy_weights(dictionary, INTEGRANDS[phi], system.pairs)
    return system, build_lp(system, weights, name=problem.label or "willmore")


def instance_lp(inst: InstanceFile):
    d, problem = inst.build()
    system, lp = build_instance_lp(d, problem, inst.phi, inst.table, inst.solver)
    return d, problem, system, lp


@dataclass(frozen=True)
class Rung:
    label: str
    resolution: int
    box: tuple[int, int, int]
    side: int
    height: int
    conormal: tuple[str, ...]

    def build(self):
        d = generate_dictionary(LatticeSpec(self.resolution, self.box))
        loop = square_loop(self.side, self.height)
        return d, loop_problem(d, loop, direction_offsets(loop, self.conormal), label=self.label)


# a unit square sampled ever finer; the last rung has mixed conormals in a
# box deep enough for fans of neighbours around a triangle
LADDER = (
    Rung("n1-flat", 1, (1, 1, 1), 1, 0, ("in",)),
    Rung("n1-cup", 1, (1, 1, 1), 1, 0, ("up",)),
    Rung("n2-flat", 2, (2, 2, 1), 2, 0, ("in",)),
    Rung("n2-cup", 2, (2, 2, 1), 2, 0, ("up",)),
    Rung("n2-mixed", 2, (2, 2, 2), 2, 1, ("in", "in", "down", "down", "in", "in", "in", "down")),
)


@dataclass
class RungResult:
    label: str
    resolution: int
    shape: tuple[int, int]
    lp_status: Status
    lp_objective: float
    n_fractional: int
    fractional_vars: np.ndarray
    ilp_status: Status | None
    ilp_objective: float
    ilp_nodes: int
    ilp_integral: bool
    seconds: float

    @property
    def sandwich_ok(self) -> bool:
        if self.ilp_status is None:
            return True
        return self.ilp_integral and self.ilp_objective >= self.lp_objective - 1e-9

    def line(self) -> str:
        ilp = "-" if self.ilp_status is None else f"{self.ilp_objective:.6f} ({self.ilp_nodes} nodes)"
        return (f"{self.label:10s} n={self.resolution} {self.shape[0]}x{self.shape[1]} "
                f"lp={self.lp_objective:.6f} fractional={self.n_fractional} ilp={ilp}")


def run_rung(rung: Rung, tol_int: float = 1e-7, node_limit: int = 100_000,
             always_ilp: bool = False) -> RungResult:
    t0 = time.perf_counter()
    d, problem = rung.build()
    system, lp = build_instance_lp(d, problem)
    lp_rep = lp_solve(lp)
    rc = round_check(lp_rep, tol_int) if lp_rep.x is not None else None
    n_frac = 0 if rc is None else rc.counts["fractional"]
    ilp_rep = None
    if lp_rep.status is Status.OPTIMAL and (n_frac or always_ilp):
        ilp_rep = ilp_solve(lp, node_limit=node_limit, tol_int=tol_int)
    integral = bool(ilp_rep is not None and ilp_rep.x is not None
                    and round_check(ilp_rep, tol_int).counts["fractional"] == 0)
    return RungResult(
        rung.label, rung.resolution, lp.shape, lp_rep.status, lp_rep.objective_value, n_frac,
        np.zeros(0, dtype=np.int64) if rc is None else rc.fractional,
        None if ilp_rep is None else ilp_rep.status,
        float("nan") if ilp_rep is None else ilp_rep.objective_value,
        0 if ilp_rep is None else ilp_rep.nodes,
        integral, time.perf_counter() - t0,
    )


def resolution_ladder(rungs=LADDER, **kw) -> list[RungResult]:
    return [run_rung(r, **kw) for r in rungs]
