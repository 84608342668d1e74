"""Shooting and regularization solvers for the Neumann prescribed mean curvature problem

    -(u' / sqrt(1 + u'^2))' = a(x) f(u)  on (0, 1),   u'(0) = u'(1) = 0.
"""

__version__ = "0.1.0"

from .eigen import EigenResult, eigenvalue, prufer_terminal_angle, spectrum
from .errors import (BracketFailure, DomainError, EmptyLevel, FamilyLost, McShootError, MissingSolution,
                     NoConvergence, NotClosed, NotReached, NotSatisfied, ScanFailure, StepSizeUnderflow)
from .integrator import Trajectory, integrate_cauchy
from .limit import (BVLimitResult, CriteriaReport, assemble_limit, classical_criteria, compute_limit,
                    detect_jumps, energy_continuity_check, track_family)
from .phase import hamiltonian, level_set, orbit_period, phase_portrait
from .problem import (Nonlinearity, Problem, WeightFunction, check_fap_prime, check_structural, compute_Ca,
                      compute_ubar)
from .regularization import RegularizedOperator, dyadic_ladder
from .shooting import ApproxSolution, probe_near_u0, rotation_number, solve_approx

__all__ = [
    "ApproxSolution", "BVLimitResult", "BracketFailure", "CriteriaReport", "DomainError", "EigenResult",
    "EmptyLevel", "FamilyLost", "McShootError", "MissingSolution", "NoConvergence", "Nonlinearity",
    "NotClosed", "NotReached", "NotSatisfied", "Problem", "RegularizedOperator", "ScanFailure",
    "StepSizeUnderflow", "Trajectory", "WeightFunction", "assemble_limit", "check_fap_prime",
    "check_structural", "classical_criteria", "compute_Ca", "compute_limit", "compute_ubar",
    "detect_jumps", "dyadic_ladder", "eigenvalue", "energy_continuity_check", "hamiltonian",
    "integrate_cauchy", "level_set", "orbit_period", "phase_portrait", "probe_near_u0",
    "prufer_terminal_angle", "rotation_number", "solve_approx", "spectrum", "track_family",
]
