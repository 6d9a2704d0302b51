"""
Solver-agnostic model representation shared by the model builders and solvers.
"""

from .model import (
    INF,
    Integrality,
    Sense,
    VariableDef,
    LinearConstraint,
    ModelIR,
    ModelArrays,
    EvaluationReport,
    evaluate,
    cut_points,
    add_tangent_cut,
    add_quadratic_penalty_epigraph,
    export_lp,
)

__all__ = [
    'INF',
    'Integrality',
    'Sense',
    'VariableDef',
    'LinearConstraint',
    'ModelIR',
    'ModelArrays',
    'EvaluationReport',
    'evaluate',
    'cut_points',
    'add_tangent_cut',
    'add_quadratic_penalty_epigraph',
    'export_lp',
]
