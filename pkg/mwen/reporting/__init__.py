"""
Comparison runs, report files and console views.
"""

from .report import (
    ComparisonReport,
    ConvergencePoint,
    RunRow,
    run_compare,
    run_tag,
    pct_difference,
    convergence_points,
)
from .emit import (
    COMPARISON_COLUMNS,
    CONVERGENCE_COLUMNS,
    emit_reports,
    emit_central,
    emit_admm,
    load_report,
    write_convergence_csv,
)
from .sweep import SweepConfig, load_sweep, parse_sweeps, resolve_variables
from .view import ReportView

__all__ = [
    'ComparisonReport',
    'ConvergencePoint',
    'RunRow',
    'run_compare',
    'run_tag',
    'pct_difference',
    'convergence_points',
    'COMPARISON_COLUMNS',
    'CONVERGENCE_COLUMNS',
    'emit_reports',
    'emit_central',
    'emit_admm',
    'load_report',
    'write_convergence_csv',
    'SweepConfig',
    'load_sweep',
    'parse_sweeps',
    'resolve_variables',
    'ReportView',
]
