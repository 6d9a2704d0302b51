"""
Decentralized MWEN: augmented subproblems, residuals, stopping rules and
feasibility restoration.
"""

from .config import AdmmConfig
from .residuals import dual_update, residuals, feasibility_metric, norm, ob_stop_check
from .subproblems import MemStep, MwmStep, mem_subproblem, mwm_subproblem, min_energy_dispatch, restore_feasibility
from .loop import (
    IterationRecord,
    DecentralizedSolution,
    WaterAgent,
    WaterPeer,
    LocalPeer,
    run_admm,
    water_energy,
    STOP_EPS,
    STOP_OBJECTIVE,
    STOP_MAX_ITERS,
)

__all__ = [
    'AdmmConfig',
    'dual_update',
    'residuals',
    'feasibility_metric',
    'norm',
    'ob_stop_check',
    'MemStep',
    'MwmStep',
    'mem_subproblem',
    'mwm_subproblem',
    'min_energy_dispatch',
    'restore_feasibility',
    'IterationRecord',
    'DecentralizedSolution',
    'WaterAgent',
    'WaterPeer',
    'LocalPeer',
    'run_admm',
    'water_energy',
    'STOP_EPS',
    'STOP_OBJECTIVE',
    'STOP_MAX_ITERS',
]
