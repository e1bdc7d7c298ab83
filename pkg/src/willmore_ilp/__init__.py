"""Curvature energies of lattice triangle surfaces as integer linear programs."""

from .constraints import (BoundaryProblem, ConstraintSystem, SystemKind, build_oriented_system,
                          build_pair_system, check_consistency)
from .geometry import (AREA, CONSTANT, INTEGRANDS, WILLMORE, IntegrandSpec, hinge,
                       mean_curvature_edge, mean_curvature_pointwise, mesh_energy)
from .lattice import LatticeSpec, TriangleDictionary, adjacent_pairs, generate_dictionary
from .qp import QuadraticEnergy, build_q, quadratic_energy
from .solver import (LinearProgram, RoundCheck, SolveReport, Status, build_lp, energy_weights,
                     ilp_solve, lp_solve, round_check)
from .tu import (EulerianCertificate, build_table1_matrix, search_eulerian_violation,
                 verify_certificate)

__all__ = [
    "AREA", "CONSTANT", "INTEGRANDS", "WILLMORE", "BoundaryProblem", "ConstraintSystem",
    "EulerianCertificate", "IntegrandSpec", "LatticeSpec", "LinearProgram", "QuadraticEnergy",
    "RoundCheck", "SolveReport", "Status", "SystemKind", "TriangleDictionary", "adjacent_pairs",
    "build_lp", "build_oriented_system", "build_pair_system", "build_q", "build_table1_matrix",
    "check_consistency", "energy_weights", "generate_dictionary", "hinge", "ilp_solve",
    "lp_solve", "mean_curvature_edge", "mean_curvature_pointwise", "mesh_energy",
    "quadratic_energy", "round_check", "search_eulerian_violation", "verify_certificate",
]
