"""
Piecewise-linear pump curves: sampling, max-affine fitting, model encoding.
"""

from .curve import FitDataset, PwlCurve, sample_quadratic, normalize_segments, eval_pwl, curve_sse
from .fitting import fit_max_affine, fit_pwl, EXACT_MAX_POINTS, EXACT_MAX_SEGMENTS
from .emit import emit_pwl_equality
from .curves import fit_scenario_curves

__all__ = [
    'FitDataset',
    'PwlCurve',
    'sample_quadratic',
    'normalize_segments',
    'eval_pwl',
    'curve_sse',
    'fit_max_affine',
    'fit_pwl',
    'EXACT_MAX_POINTS',
    'EXACT_MAX_SEGMENTS',
    'emit_pwl_equality',
    'fit_scenario_curves',
]
