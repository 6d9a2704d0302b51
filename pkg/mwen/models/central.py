"""
Centralized MWEN benchmark: one MILP holding both subsystems.

The MEM power balance reads the water system's power variables directly, and
the objective is the microgrid operating cost alone; water energy is
reported, not minimized.
"""

import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Tuple

from pydantic import BaseModel

from mwen.core.config import SolverConfig
from mwen.core.errors import InfeasibleError, SolverLimitError
from mwen.model_ir import ModelIR
from mwen.otel.telemetry import span
from mwen.pwl import PwlCurve
from mwen.scenario.models import Scenario
from mwen.solver import SolveStatus, solve
from .mem import LinkedWater, MemDispatch, MemVarMap, build_mem, extract_mem_solution
from .mwm import MwmVarMap, WaterDispatch, build_mwm, extract_mwm_solution

logger = logging.getLogger(__name__)


@dataclass
class CentralMaps:
    mem: MemVarMap
    mwm: MwmVarMap


class CentralSolution(BaseModel):
    mem: MemDispatch
    water: WaterDispatch
    cost: float
    water_energy_kwh: float
    status: str
    nodes: int = 0
    iterations: int = 0
    backend: str = "builtin"


def build_central(scenario: Scenario, curves: Mapping[str, PwlCurve]) -> Tuple[ModelIR, CentralMaps]:
    """MWM constraints first, then MEM linked to the water power variables"""
    model = ModelIR(f"central-{scenario.name}")
    model, mwm_map = build_mwm(scenario, curves, objective=None, model=model)
    model, mem_map = build_mem(scenario, LinkedWater(var_ids=tuple(mwm_map.water_power)), model=model)
    logger.info(
        f"Built centralized model for '{scenario.name}': {model.num_variables} variables, "
        f"{model.num_constraints} constraints, {len(model.binary_ids())} binaries"
    )
    return model, CentralMaps(mem=mem_map, mwm=mwm_map)


def solve_central(
    scenario: Scenario,
    curves: Mapping[str, PwlCurve],
    solver_config: Optional[SolverConfig] = None,
) -> CentralSolution:
    """
    Solve the centralized model and extract both dispatches

    Raises:
        InfeasibleError: solver reports Infeasible or Unbounded
        SolverLimitError: limit reached without an incumbent
    """
    model, maps = build_central(scenario, curves)
    with span("central.solve", scenario=scenario.name) as current:
        result = solve(model, solver_config)
        if current is not None:
            current.set_attribute("status", result.status.value)

    if result.status in (SolveStatus.INFEASIBLE, SolveStatus.UNBOUNDED):
        raise InfeasibleError(f"Centralized model for '{scenario.name}' is {result.status.value}", result.status.value)
    if not result.has_solution:
        raise SolverLimitError(f"Centralized solve for '{scenario.name}' stopped without a solution: {result.message}")
    if result.status == SolveStatus.ITERATION_LIMIT:
        logger.warning(f"Centralized solve hit its limit; reporting incumbent (bound {result.best_bound})")

    water = extract_mwm_solution(maps.mwm, result.x)
    mem = extract_mem_solution(maps.mem, result.x)
    solution = CentralSolution(
        mem=mem,
        water=water,
        cost=mem.total_cost,
        water_energy_kwh=water.energy_kwh,
        status=result.status.value,
        nodes=result.nodes,
        iterations=result.iterations,
        backend=result.backend,
    )
    logger.info(f"Centralized '{scenario.name}': cost {solution.cost:.6f} $, water energy {solution.water_energy_kwh:.4f} kWh")
    return solution
