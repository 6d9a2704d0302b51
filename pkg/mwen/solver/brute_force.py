"""Exhaustive enumeration of binary assignments; the test oracle for branch and bound."""

import itertools
import logging
import math
from typing import Optional

import numpy as np

from mwen.core.config import SolverConfig
from mwen.core.errors import SolverLimitError
from mwen.model_ir import ModelArrays, ModelIR, Sense
from .base import SolveResult, SolveStatus
from .simplex import solve_lp

logger = logging.getLogger(__name__)

DEFAULT_MAX_BINARIES = 14


def _rows_unreachable(arrays: ModelArrays, lo: np.ndarray, hi: np.ndarray, tol: float) -> bool:
    """True when some row cannot hold for any point inside the bounds"""
    A = arrays.A
    with np.errstate(invalid="ignore"):
        least = np.where(A > 0, A * lo, np.where(A < 0, A * hi, 0.0)).sum(axis=1)
        most = np.where(A > 0, A * hi, np.where(A < 0, A * lo, 0.0)).sum(axis=1)
    slack = tol * np.maximum(1.0, np.abs(arrays.rhs))
    senses = np.array([s.value for s in arrays.senses])
    too_high = (senses != Sense.GE.value) & (least > arrays.rhs + slack)
    too_low = (senses != Sense.LE.value) & (most < arrays.rhs - slack)
    return bool(np.any(too_high | too_low))


def brute_force_milp(
    model: ModelIR,
    max_binaries: int = DEFAULT_MAX_BINARIES,
    config: Optional[SolverConfig] = None,
) -> SolveResult:
    """
    Solve every binary assignment's LP and keep the best

    Assignments are enumerated in lexicographic order; an objective must beat
    the incumbent by more than 1e-12 to replace it.
    Assignments under which some row is out of reach of its activity range
    are skipped without an LP.

    Raises:
        SolverLimitError: more than ``max_binaries`` binaries
    """
    config = config or SolverConfig()
    arrays = model.to_arrays()
    binary_ids = np.nonzero(arrays.binary)[0]
    if len(binary_ids) > max_binaries:
        raise SolverLimitError(
            f"Brute force limited to {max_binaries} binaries, model '{model.name}' has {len(binary_ids)}"
        )
    if len(binary_ids) == 0:
        result = solve_lp(None, config, arrays=arrays)
        result.backend = "brute_force"
        return result

    best: Optional[SolveResult] = None
    best_obj = math.inf
    nodes = iterations = skipped = 0
    unbounded = False
    for assignment in itertools.product((0.0, 1.0), repeat=len(binary_ids)):
        lo, hi = arrays.lower.copy(), arrays.upper.copy()
        values = np.array(assignment)
        if np.any(values < lo[binary_ids]) or np.any(values > hi[binary_ids]):
            continue
        lo[binary_ids] = values
        hi[binary_ids] = values
        if arrays.A.size and _rows_unreachable(arrays, lo, hi, 1e3 * config.feasibility_tol):
            skipped += 1
            continue
        result = solve_lp(None, config, lo, hi, arrays=arrays)
        nodes += 1
        iterations += result.iterations
        if result.status == SolveStatus.UNBOUNDED:
            unbounded = True
            break
        if result.is_optimal and result.objective < best_obj - 1e-12:
            best, best_obj = result, result.objective

    logger.debug(f"Brute force enumerated {nodes} assignments ({skipped} skipped) of {len(binary_ids)} binaries")
    if unbounded:
        return SolveResult(SolveStatus.UNBOUNDED, iterations=iterations, nodes=nodes, backend="brute_force")
    if best is None:
        return SolveResult(SolveStatus.INFEASIBLE, iterations=iterations, nodes=nodes, backend="brute_force")
    return SolveResult(
        SolveStatus.OPTIMAL,
        x=best.x,
        objective=best_obj,
        best_bound=best_obj,
        iterations=iterations,
        nodes=nodes,
        backend="brute_force",
    )
