"""
Max-affine least-squares fitting of pump data.

``exact_milp`` builds the big-M program that selects, per data point, which
affine piece attains the maximum (binaries alpha, big number Omega) and
minimizes the squared residuals. The squares are handled by outer
approximation: residual epigraphs receive tangent cuts until the lower bound
from the MILP meets the best true SSE seen. ``partition_heuristic`` alternates
between per-piece least squares and reassigning points to the piece that
attains the maximum.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from mwen.core.config import PwlConfig, SolverConfig
from mwen.core.errors import ModelBuildError
from mwen.model_ir import ModelIR, Sense
from mwen.solver import SolveStatus, solve
from .curve import FitDataset, PwlCurve, curve_sse, normalize_segments

logger = logging.getLogger(__name__)

EXACT_MAX_POINTS = 25
EXACT_MAX_SEGMENTS = 4
OA_MAX_ROUNDS = 60
OA_REL_GAP = 1e-8
OA_ABS_GAP = 1e-10
HEURISTIC_MAX_ITERS = 100

Lines = List[Tuple[float, float]]


def fit_max_affine(
    data: FitDataset,
    segments: int,
    method: str = "auto",
    solver_config: Optional[SolverConfig] = None,
) -> PwlCurve:
    """
    Fit a convex max-affine curve with at most ``segments`` pieces

    Args:
        data: Points to fit
        segments: Number of affine pieces (v-hat)
        method: ``exact_milp``, ``partition_heuristic`` or ``auto``
        solver_config: Solver settings for the exact program

    Returns:
        Normalized PwlCurve over [min flow, max flow]
    """
    if segments < 1:
        raise ModelBuildError(f"Number of segments must be >= 1, got {segments}")
    if method == "auto":
        exact_ok = data.size <= EXACT_MAX_POINTS and segments <= EXACT_MAX_SEGMENTS
        method = "exact_milp" if exact_ok else "partition_heuristic"
    domain = (min(data.flows), max(data.flows))

    if segments == 1:
        lines = [_least_squares(*data.arrays())]
    elif method == "partition_heuristic":
        lines = _partition_heuristic(data, segments)
    elif method == "exact_milp":
        if data.size > EXACT_MAX_POINTS or segments > EXACT_MAX_SEGMENTS:
            raise ModelBuildError(
                f"exact_milp is limited to {EXACT_MAX_POINTS} points and {EXACT_MAX_SEGMENTS} segments "
                f"(got {data.size} points, {segments} segments); use partition_heuristic"
            )
        lines = _exact_milp(data, segments, solver_config)
    else:
        raise ModelBuildError(f"Unknown fitting method '{method}'")

    sse = curve_sse(lines, data)
    curve = normalize_segments(lines, domain, sse)
    logger.debug(f"Fitted {len(curve.segments)} segments with {method}: SSE {sse:.6g}")
    return curve


def fit_pwl(data: FitDataset, config: PwlConfig, solver_config: Optional[SolverConfig] = None) -> PwlCurve:
    return fit_max_affine(data, config.segments, config.method, solver_config)


# heuristic

def _least_squares(flows: np.ndarray, powers: np.ndarray) -> Tuple[float, float]:
    design = np.column_stack([flows, np.ones_like(flows)])
    (a, b), *_ = np.linalg.lstsq(design, powers, rcond=None)
    return float(a), float(b)


def _memberships(lines: Lines, flows: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Primary piece per point (lowest index on ties) plus every tied piece"""
    values = np.outer(flows, [a for a, _ in lines]) + np.array([b for _, b in lines])
    best = values.max(axis=1)
    scale = max(1.0, float(np.max(np.abs(best))))
    primary = np.argmax(values, axis=1)
    tied = np.abs(values - best[:, None]) <= 1e-9 * scale
    return primary, [np.nonzero(tied[:, v])[0] for v in range(len(lines))]


def _alternate(data: FitDataset, lines: Lines) -> Lines:
    """Refit each piece on the points where it is (one of) the maximum, until stable"""
    flows, powers = data.arrays()
    best_lines, best_sse = list(lines), curve_sse(lines, data)
    previous = None
    for _ in range(HEURISTIC_MAX_ITERS):
        primary, members = _memberships(lines, flows)
        refit: Lines = []
        for v, idx in enumerate(members):
            if len(idx) >= 2:
                refit.append(_least_squares(flows[idx], powers[idx]))
        if not refit:
            break
        lines = refit
        sse = curve_sse(lines, data)
        if sse < best_sse - 1e-15:
            best_lines, best_sse = list(lines), sse
        if previous is not None and np.array_equal(primary, previous):
            break
        previous = primary
    return best_lines


def _partition_heuristic(data: FitDataset, segments: int) -> Lines:
    flows, powers = data.arrays()
    m = data.size
    segments = min(segments, m - 1)
    # contiguous groups sharing their boundary points
    cuts = [int(np.floor(v * (m - 1) / segments)) for v in range(segments + 1)]
    lines = [_least_squares(flows[cuts[v]:cuts[v + 1] + 1], powers[cuts[v]:cuts[v + 1] + 1]) for v in range(segments)]
    return _alternate(data, lines)


# exact program

def _build_fit_model(data: FitDataset, segments: int, omega: float, slope_bound: float) -> Tuple[ModelIR, List[int], List[int], List[int], List[int]]:
    flows, powers = data.arrays()
    m = data.size
    model = ModelIR("pwl-fit")
    intercept_bound = 2.0 * (float(np.max(np.abs(powers))) + slope_bound * float(np.max(np.abs(flows)))) + 1.0
    a = [model.add_variable(name=f"a[{v}]", lower=-slope_bound, upper=slope_bound) for v in range(segments)]
    b = [model.add_variable(name=f"b[{v}]", lower=-intercept_bound, upper=intercept_bound) for v in range(segments)]
    for v in range(segments - 1):
        model.add_linear_constraint([(a[v], 1.0), (a[v + 1], -1.0)], Sense.LE, 0.0, tag="order")

    # P[v][i]: running maximum of the first v+2 pieces at point i
    P = [[model.add_variable(name=f"P[{v},{i}]", lower=-intercept_bound - slope_bound * abs(flows[i]))
          for i in range(m)] for v in range(segments - 1)]
    alpha = [[model.add_variable(name=f"alpha[{v},{i}]", binary=True) for i in range(m)] for v in range(segments - 1)]

    def piece_bounds(target: int, v: int, i: int, relax: int, on_one: bool) -> None:
        # a_v W_i + b_v <= P <= a_v W_i + b_v + Omega * (alpha or 1 - alpha)
        w = float(flows[i])
        model.add_linear_constraint([(a[v], w), (b[v], 1.0), (target, -1.0)], Sense.LE, 0.0, tag="max-lower")
        if on_one:
            model.add_linear_constraint([(target, 1.0), (a[v], -w), (b[v], -1.0), (relax, -omega)], Sense.LE, 0.0, tag="max-upper")
        else:
            model.add_linear_constraint([(target, 1.0), (a[v], -w), (b[v], -1.0), (relax, omega)], Sense.LE, omega, tag="max-upper")

    for i in range(m):
        piece_bounds(P[0][i], 0, i, alpha[0][i], on_one=True)
        piece_bounds(P[0][i], 1, i, alpha[0][i], on_one=False)
        for v in range(2, segments):
            prev, cur, sel = P[v - 2][i], P[v - 1][i], alpha[v - 1][i]
            model.add_linear_constraint([(prev, 1.0), (cur, -1.0)], Sense.LE, 0.0, tag="cascade-lower")
            model.add_linear_constraint([(cur, 1.0), (prev, -1.0), (sel, -omega)], Sense.LE, 0.0, tag="cascade-upper")
            piece_bounds(cur, v, i, sel, on_one=False)

    # t_i >= (P_i - Y_i)^2 through tangent cuts
    t = [model.add_variable(name=f"t[{i}]", lower=0.0) for i in range(m)]
    for i in range(m):
        model.add_objective_term(t[i], 1.0)
    return model, a, b, P[-1], t


def _add_residual_cut(model: ModelIR, t: int, p: int, target: float, point: float) -> None:
    # t >= 2*point*(P - Y) - point^2
    model.add_linear_constraint([(t, 1.0), (p, -2.0 * point)], Sense.GE, -2.0 * point * target - point * point, tag="residual-cut")


def _exact_milp(data: FitDataset, segments: int, solver_config: Optional[SolverConfig]) -> Lines:
    flows, powers = data.arrays()
    incumbent = _partition_heuristic(data, segments)
    upper = curve_sse(incumbent, data)

    secants = np.abs(np.diff(powers) / np.diff(flows))
    slope_bound = max(float(np.max(secants)), max(abs(a) for a, _ in incumbent))
    width = float(flows[-1] - flows[0])
    omega = 10.0 * (float(np.max(np.abs(powers))) + slope_bound * width)
    # room for pieces steeper than any secant
    slope_bound = 2.0 * slope_bound + 1.0

    model, a, b, P, t = _build_fit_model(data, segments, omega, slope_bound)
    spread = max(1.0, float(np.max(np.abs(powers))))
    for i in range(data.size):
        for point in (-spread, -0.1 * spread, 0.0, 0.1 * spread, spread):
            _add_residual_cut(model, t[i], P[i], float(powers[i]), point)

    lower = 0.0
    for round_no in range(OA_MAX_ROUNDS):
        if upper - lower <= max(OA_ABS_GAP, OA_REL_GAP * upper):
            break
        result = solve(model, solver_config)
        if result.status != SolveStatus.OPTIMAL:
            if result.status == SolveStatus.INFEASIBLE:
                raise ModelBuildError(f"Fitting program infeasible after {round_no} rounds")
            logger.warning(f"Fitting program stopped with {result.status.value}; keeping best fit so far")
            break
        lower = max(lower, result.objective)
        lines = [(result.value(a[v]), result.value(b[v])) for v in range(segments)]
        lines = _polished(data, lines)
        sse = curve_sse(lines, data)
        if sse < upper:
            incumbent, upper = lines, sse
        added = 0
        for i in range(data.size):
            residual = result.value(P[i]) - float(powers[i])
            if residual * residual - result.value(t[i]) > OA_ABS_GAP:
                _add_residual_cut(model, t[i], P[i], float(powers[i]), residual)
                added += 1
        logger.debug(f"Outer approximation round {round_no}: bound {lower:.6g}, best SSE {upper:.6g}, {added} cuts")
        if added == 0:
            break
    return incumbent


def _polished(data: FitDataset, lines: Lines) -> Lines:
    """Keep the better of the solved pieces and their least-squares refit"""
    refit = _alternate(data, lines)
    return refit if curve_sse(refit, data) <= curve_sse(lines, data) else lines

