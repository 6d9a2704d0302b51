"""
Built-in LP/MILP solvers and the backend seam.
"""

from .base import SolveStatus, SolveResult, SolverBackend, SolverRegistry, solver_registry
from .simplex import solve_lp
from .branch_and_bound import solve_milp
from .brute_force import brute_force_milp, DEFAULT_MAX_BINARIES
from .highs import solve_highs
from .backends import BuiltinBackend, HighsBackend, BruteForceBackend, solve

__all__ = [
    'SolveStatus',
    'SolveResult',
    'SolverBackend',
    'SolverRegistry',
    'solver_registry',
    'solve_lp',
    'solve_milp',
    'brute_force_milp',
    'DEFAULT_MAX_BINARIES',
    'solve_highs',
    'BuiltinBackend',
    'HighsBackend',
    'BruteForceBackend',
    'solve',
]
