"""
MEM, MWM and centralized MWEN model builders.
"""

from . import tags
from .coupling import AugmentedTerms, add_augmented_terms, augmented_value, penalty_gaps, refine_penalty_cuts
from .mem import (
    FixedWater,
    CouplingWater,
    LinkedWater,
    WaterMode,
    MemVarMap,
    MemDispatch,
    CostBreakdown,
    build_mem,
    mem_cost,
    extract_mem_solution,
    balance_residuals,
)
from .mwm import (
    MinEnergy,
    MwmVarMap,
    WaterDispatch,
    build_mwm,
    water_power,
    water_power_bounds,
    extract_mwm_solution,
    water_balance_residuals,
)
from .central import CentralMaps, CentralSolution, build_central, solve_central

__all__ = [
    'tags',
    'AugmentedTerms',
    'add_augmented_terms',
    'augmented_value',
    'penalty_gaps',
    'refine_penalty_cuts',
    'FixedWater',
    'CouplingWater',
    'LinkedWater',
    'WaterMode',
    'MemVarMap',
    'MemDispatch',
    'CostBreakdown',
    'build_mem',
    'mem_cost',
    'extract_mem_solution',
    'balance_residuals',
    'MinEnergy',
    'MwmVarMap',
    'WaterDispatch',
    'build_mwm',
    'water_power',
    'water_power_bounds',
    'extract_mwm_solution',
    'water_balance_residuals',
    'CentralMaps',
    'CentralSolution',
    'build_central',
    'solve_central',
]
