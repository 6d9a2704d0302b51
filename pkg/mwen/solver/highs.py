"""
HiGHS backend through scipy.optimize.

Optional: install with ``pip install mwen-nexus[highs]``.
"""

import logging
from typing import Optional

import numpy as np

from mwen.core.config import SolverConfig
from mwen.core.errors import ModelBuildError
from mwen.model_ir import ModelIR, Sense
from .base import SolveResult, SolveStatus

logger = logging.getLogger(__name__)

_STATUS = {
    0: SolveStatus.OPTIMAL,
    1: SolveStatus.ITERATION_LIMIT,
    2: SolveStatus.INFEASIBLE,
    3: SolveStatus.UNBOUNDED,
}


def _import_scipy():
    try:
        from scipy import optimize
    except ImportError as e:
        raise ModelBuildError(f"HiGHS backend needs scipy (pip install mwen-nexus[highs]): {e}")
    return optimize


def solve_highs(model: ModelIR, config: Optional[SolverConfig] = None) -> SolveResult:
    """Solve with HiGHS: linprog for pure LPs (duals included), milp otherwise"""
    config = config or SolverConfig()
    optimize = _import_scipy()
    arrays = model.to_arrays()
    bounds = list(zip(arrays.lower, arrays.upper))
    bounds = [(None if np.isinf(lo) else lo, None if np.isinf(hi) else hi) for lo, hi in bounds]

    if not arrays.binary.any():
        le = [i for i, s in enumerate(arrays.senses) if s != Sense.EQ]
        eq = [i for i, s in enumerate(arrays.senses) if s == Sense.EQ]
        flip = np.array([-1.0 if arrays.senses[i] == Sense.GE else 1.0 for i in le])
        A_ub = arrays.A[le] * flip[:, None] if le else None
        b_ub = arrays.rhs[le] * flip if le else None
        res = optimize.linprog(
            arrays.c,
            A_ub=A_ub,
            b_ub=b_ub,
            A_eq=arrays.A[eq] if eq else None,
            b_eq=arrays.rhs[eq] if eq else None,
            bounds=bounds,
            method="highs",
            options={"primal_feasibility_tolerance": max(config.feasibility_tol, 1e-10)},
        )
        status = _STATUS.get(res.status, SolveStatus.INFEASIBLE)
        if status != SolveStatus.OPTIMAL:
            return SolveResult(status, backend="highs", message=res.message)
        duals = np.zeros(len(arrays.senses))
        if le:
            duals[le] = np.asarray(res.ineqlin.marginals) * flip
        if eq:
            duals[eq] = np.asarray(res.eqlin.marginals)
        objective = float(res.fun) + arrays.objective_constant
        return SolveResult(
            status,
            x=[float(v) for v in res.x],
            objective=objective,
            best_bound=objective,
            duals=duals.tolist(),
            iterations=int(getattr(res, "nit", 0)),
            backend="highs",
        )

    lower_rows = np.where([s == Sense.LE for s in arrays.senses], -np.inf, arrays.rhs)
    upper_rows = np.where([s == Sense.GE for s in arrays.senses], np.inf, arrays.rhs)
    constraints = optimize.LinearConstraint(arrays.A, lower_rows, upper_rows) if len(arrays.senses) else ()
    res = optimize.milp(
        arrays.c,
        integrality=arrays.binary.astype(int),
        bounds=optimize.Bounds(arrays.lower, arrays.upper),
        constraints=constraints,
        options={"mip_rel_gap": config.mip_gap, "node_limit": config.node_limit},
    )
    status = _STATUS.get(res.status, SolveStatus.INFEASIBLE)
    if res.x is None:
        return SolveResult(status, backend="highs", message=res.message)
    objective = float(res.fun) + arrays.objective_constant
    bound = getattr(res, "mip_dual_bound", None)
    return SolveResult(
        status,
        x=[float(v) for v in res.x],
        objective=objective,
        best_bound=float(bound) + arrays.objective_constant if bound is not None else objective,
        nodes=int(getattr(res, "mip_node_count", 0) or 0),
        backend="highs",
    )
