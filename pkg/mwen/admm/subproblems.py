"""
The two augmented subproblems and feasibility restoration.

Each subproblem is rebuilt every iteration, solved, and re-solved with extra
tangent cuts while the penalty linearization is looser than
``cut_tolerance`` at the solved point.
"""

import logging
from typing import List, Mapping, NamedTuple, Optional, Sequence, Tuple

from mwen.core.config import SolverConfig
from mwen.core.errors import InfeasibleError, ModelBuildError, SolverLimitError
from mwen.model_ir import ModelIR
from mwen.otel.telemetry import span
from mwen.pwl import PwlCurve
from mwen.scenario.models import Scenario
from mwen.solver import SolveResult, SolveStatus, solve
from mwen.models import (
    AugmentedTerms,
    CouplingWater,
    FixedWater,
    MemDispatch,
    MinEnergy,
    WaterDispatch,
    add_augmented_terms,
    build_mem,
    build_mwm,
    extract_mem_solution,
    extract_mwm_solution,
    refine_penalty_cuts,
)
from .config import AdmmConfig

logger = logging.getLogger(__name__)


class MemStep(NamedTuple):
    power: List[float]
    cost: float
    dispatch: MemDispatch
    # augmented objective of the last solve, penalty as linearized
    objective: float = 0.0


class MwmStep(NamedTuple):
    power: List[float]
    energy: float
    dispatch: WaterDispatch
    objective: float = 0.0


def _require_solution(result: SolveResult, what: str) -> None:
    if result.status in (SolveStatus.INFEASIBLE, SolveStatus.UNBOUNDED):
        raise InfeasibleError(f"{what} is {result.status.value}", result.status.value)
    if not result.has_solution:
        raise SolverLimitError(f"{what} stopped without a solution: {result.message}")
    if result.status == SolveStatus.ITERATION_LIMIT:
        logger.warning(f"{what} hit its limit; using incumbent")


def _terms(
    multipliers: Sequence[float],
    target: Sequence[float],
    rho: float,
    sign: int,
    bounds: Tuple[float, float],
    config: AdmmConfig,
    previous: Optional[Sequence[float]],
) -> AugmentedTerms:
    extra: Tuple[Tuple[float, ...], ...] = ()
    if previous is not None:
        # own previous iterate and the consensus midpoint
        extra = tuple((float(p), 0.5 * (float(p) + float(c))) for p, c in zip(previous, target))
    return AugmentedTerms(
        multipliers=tuple(float(v) for v in multipliers),
        target=tuple(float(v) for v in target),
        rho=rho,
        sign=sign,
        bounds=bounds,
        cut_count=config.cut_count,
        cut_spacing=config.cut_spacing,
        cut_width=config.cut_width,
        extra_points=extra,
    )


def _solve_refined(
    model: ModelIR,
    coupling: Sequence[int],
    epigraphs: Sequence[int],
    terms: AugmentedTerms,
    config: AdmmConfig,
    solver_config: Optional[SolverConfig],
    what: str,
) -> SolveResult:
    result = solve(model, solver_config)
    _require_solution(result, what)
    for round_no in range(config.cut_refine_rounds):
        added = refine_penalty_cuts(
            model, coupling, epigraphs, terms,
            result.values(list(coupling)), result.values(list(epigraphs)),
            config.cut_tolerance,
        )
        if not added:
            break
        logger.debug(f"{what}: refinement round {round_no + 1} added {added} cuts")
        result = solve(model, solver_config)
        _require_solution(result, what)
    return result


def _check_bounds(bounds: Optional[Tuple[float, float]]) -> Tuple[float, float]:
    if bounds is None:
        raise ModelBuildError("Coupling bounds are required for the augmented subproblems")
    return float(bounds[0]), float(bounds[1])


def mem_subproblem(
    scenario: Scenario,
    multipliers: Sequence[float],
    target: Sequence[float],
    rho: float,
    bounds: Tuple[float, float],
    config: Optional[AdmmConfig] = None,
    solver_config: Optional[SolverConfig] = None,
    previous: Optional[Sequence[float]] = None,
) -> MemStep:
    """
    MEM with a free coupling variable and objective C_E + lambda.P_E + rho/2 ||P_E - target||^2

    Returns:
        (P_E, pure operating cost C_E, dispatch)
    """
    config = config or AdmmConfig()
    lo, hi = _check_bounds(bounds)
    with span("admm.mem_subproblem", scenario=scenario.name):
        model, var_map = build_mem(scenario, CouplingWater(lower=lo, upper=hi))
        terms = _terms(multipliers, target, rho, +1, (lo, hi), config, previous)
        epigraphs = add_augmented_terms(model, var_map.water, terms)
        result = _solve_refined(model, var_map.water, epigraphs, terms, config, solver_config, "MEM subproblem")
    dispatch = extract_mem_solution(var_map, result.x)
    return MemStep(list(dispatch.water_power), dispatch.total_cost, dispatch, result.objective)


def mwm_subproblem(
    scenario: Scenario,
    curves: Mapping[str, PwlCurve],
    multipliers: Sequence[float],
    target: Sequence[float],
    rho: float,
    bounds: Tuple[float, float],
    config: Optional[AdmmConfig] = None,
    solver_config: Optional[SolverConfig] = None,
    previous: Optional[Sequence[float]] = None,
) -> MwmStep:
    """
    MWM with objective -lambda.P_W + rho/2 ||P_W - target||^2 (+ delta * f_W)

    Returns:
        (P_W, water energy f_W in kWh, dispatch)
    """
    config = config or AdmmConfig()
    lo, hi = _check_bounds(bounds)
    with span("admm.mwm_subproblem", scenario=scenario.name):
        terms = _terms(multipliers, target, rho, -1, (lo, hi), config, previous)
        model, var_map = build_mwm(scenario, curves, objective=terms, energy_weight=config.mwm_energy_weight)
        result = _solve_refined(model, var_map.water_power, var_map.penalty, terms, config, solver_config, "MWM subproblem")
    dispatch = extract_mwm_solution(var_map, result.x)
    return MwmStep(list(dispatch.power), dispatch.energy_kwh, dispatch, result.objective)


def min_energy_dispatch(
    scenario: Scenario,
    curves: Mapping[str, PwlCurve],
    solver_config: Optional[SolverConfig] = None,
) -> WaterDispatch:
    """The water operator's own optimum; seeds the coupling profile"""
    model, var_map = build_mwm(scenario, curves, objective=MinEnergy())
    result = solve(model, solver_config)
    _require_solution(result, "Minimum-energy MWM")
    return extract_mwm_solution(var_map, result.x)


def restore_feasibility(
    scenario: Scenario,
    water_profile: Sequence[float],
    solver_config: Optional[SolverConfig] = None,
) -> Tuple[MemDispatch, float]:
    """
    Re-solve MEM with the water power fixed to the water operator's dispatch

    Returns:
        (dispatch, operating cost): the cost reported for the decentralized run
    """
    model, var_map = build_mem(scenario, FixedWater(series=tuple(float(v) for v in water_profile)))
    result = solve(model, solver_config)
    _require_solution(result, "Restoration MEM")
    dispatch = extract_mem_solution(var_map, result.x)
    logger.info(f"Restored MEM dispatch for '{scenario.name}': cost {dispatch.total_cost:.6f} $")
    return dispatch, dispatch.total_cost

