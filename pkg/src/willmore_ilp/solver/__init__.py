from .branch_bound import RoundCheck, ilp_solve, round_check
from .lp import EnergyWeights, LinearProgram, SolveReport, Status, build_lp, energy_weights, fractional_indices
from .simplex import lp_solve, verify_farkas

__all__ = [
    "EnergyWeights", "LinearProgram", "RoundCheck", "SolveReport", "Status", "build_lp",
    "energy_weights", "fractional_indices", "ilp_solve", "lp_solve", "round_check", "verify_farkas",
]
