"""
Best-bound branch and bound over the bounded simplex.

Nodes differ from the root only in binary bounds. Each child LP is solved when
the node is created so the heap is keyed by its relaxation value; ties go to
the deeper node, then to creation order, which keeps the search deterministic.
Branching picks the most fractional binary, lowest id first.
"""

import heapq
import itertools
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from mwen.core.config import SolverConfig
from mwen.model_ir import ModelArrays, ModelIR
from .base import SolveResult, SolveStatus
from .simplex import solve_lp

logger = logging.getLogger(__name__)


def _fractionality(x: np.ndarray, binary_ids: np.ndarray) -> np.ndarray:
    values = x[binary_ids]
    return np.abs(values - np.round(values))


def _polish(
    arrays: ModelArrays,
    x: np.ndarray,
    binary_ids: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    config: SolverConfig,
) -> Optional[SolveResult]:
    """Re-solve with binaries fixed at their rounded values"""
    fixed = np.round(x[binary_ids])
    lo, hi = lower.copy(), upper.copy()
    lo[binary_ids] = fixed
    hi[binary_ids] = fixed
    result = solve_lp(None, config, lo, hi, arrays=arrays)
    return result if result.is_optimal else None


def solve_milp(
    model: ModelIR,
    config: Optional[SolverConfig] = None,
    node_limit: Optional[int] = None,
) -> SolveResult:
    """
    Solve a MILP with binaries by branch and bound

    Args:
        model: Model to solve
        config: Tolerances; ``config.node_limit`` unless ``node_limit`` is given
        node_limit: Maximum number of LP relaxations solved

    Returns:
        SolveResult; IterationLimit carries the incumbent (if any) and best bound
    """
    config = config or SolverConfig()
    node_limit = node_limit or config.node_limit
    arrays = model.to_arrays()
    binary_ids = np.nonzero(arrays.binary)[0]

    root = solve_lp(None, config, arrays=arrays)
    nodes = 1
    iterations = root.iterations
    if root.status != SolveStatus.OPTIMAL:
        root.nodes = nodes
        return root
    if len(binary_ids) == 0:
        root.nodes = nodes
        return root

    counter = itertools.count()
    heap: List[Tuple[float, int, int, np.ndarray, np.ndarray, np.ndarray]] = []
    heapq.heappush(heap, (root.objective, 0, next(counter), arrays.lower.copy(), arrays.upper.copy(), np.asarray(root.x)))

    incumbent: Optional[SolveResult] = None
    incumbent_obj = math.inf
    status = SolveStatus.OPTIMAL
    # lowest LP bound of subtrees dropped without being solved
    unexplored_bound = math.inf

    def gap_tolerance() -> float:
        return config.mip_gap * max(1.0, abs(incumbent_obj)) if incumbent is not None else 0.0

    while heap:
        bound, neg_depth, _, lower, upper, x = heapq.heappop(heap)
        if incumbent is not None and bound >= incumbent_obj - gap_tolerance():
            heapq.heappush(heap, (bound, neg_depth, next(counter), lower, upper, x))
            break

        frac = _fractionality(x, binary_ids)
        worst = int(np.argmax(frac))
        if frac[worst] <= config.integrality_tol:
            if frac[worst] == 0.0:
                candidate = SolveResult(SolveStatus.OPTIMAL, x=x.tolist(), objective=bound)
            else:
                candidate = _polish(arrays, x, binary_ids, lower, upper, config)
                nodes += 1
            if candidate is not None:
                iterations += candidate.iterations
                if candidate.objective < incumbent_obj:
                    incumbent, incumbent_obj = candidate, candidate.objective
                    logger.debug(f"New incumbent {incumbent_obj:.10g} at node {nodes}")
            continue

        # most fractional; argmax returns the lowest id on ties
        score = np.minimum(x[binary_ids] - np.floor(x[binary_ids]), np.ceil(x[binary_ids]) - x[binary_ids])
        branch_var = int(binary_ids[int(np.argmax(score))])

        for fix in (0.0, 1.0):
            if nodes >= node_limit:
                unexplored_bound = min(unexplored_bound, bound)
                break
            lo, hi = lower.copy(), upper.copy()
            lo[branch_var] = fix
            hi[branch_var] = fix
            child = solve_lp(None, config, lo, hi, arrays=arrays)
            nodes += 1
            iterations += child.iterations
            if child.status == SolveStatus.ITERATION_LIMIT:
                status = SolveStatus.ITERATION_LIMIT
                unexplored_bound = min(unexplored_bound, bound)
                continue
            if child.status != SolveStatus.OPTIMAL:
                continue
            if incumbent is not None and child.objective >= incumbent_obj - gap_tolerance():
                continue
            heapq.heappush(heap, (child.objective, neg_depth - 1, next(counter), lo, hi, np.asarray(child.x)))

        if nodes >= node_limit:
            logger.warning(f"Node limit {node_limit} reached with {len(heap)} open nodes")
            status = SolveStatus.ITERATION_LIMIT
            break

    open_bound = min(min((item[0] for item in heap), default=math.inf), unexplored_bound)
    best_bound = min(open_bound, incumbent_obj)

    if incumbent is None:
        if status == SolveStatus.ITERATION_LIMIT:
            return SolveResult(status, best_bound=best_bound if math.isfinite(open_bound) else None, iterations=iterations, nodes=nodes)
        return SolveResult(SolveStatus.INFEASIBLE, iterations=iterations, nodes=nodes)

    if status == SolveStatus.OPTIMAL and open_bound < incumbent_obj - gap_tolerance():
        status = SolveStatus.ITERATION_LIMIT
    logger.debug(f"Branch and bound finished: {status.value}, objective {incumbent_obj:.10g}, {nodes} nodes")
    return SolveResult(
        status,
        x=incumbent.x,
        objective=incumbent_obj,
        best_bound=best_bound,
        iterations=iterations,
        nodes=nodes,
    )
