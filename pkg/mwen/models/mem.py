"""
Microgrid energy management model.

Generators with on/off status, storage with exclusive charge/discharge and
level dynamics, a tie-line with exclusive import/export, and the hourly power
balance against the net load. How the water system's consumption enters the
balance is chosen by the water mode:

- ``FixedWater``: a known series on the right-hand side
- ``CouplingWater``: a bounded free variable per step (the ADMM coupling copy)
- ``LinkedWater``: existing variables of the same model (centralized model)
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict

from mwen.core.errors import ModelBuildError
from mwen.model_ir import ModelIR, Sense
from mwen.scenario.models import Scenario
from . import tags

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-6


class FixedWater(BaseModel):
    model_config = ConfigDict(frozen=True)
    series: Tuple[float, ...]


class CouplingWater(BaseModel):
    model_config = ConfigDict(frozen=True)
    lower: float = 0.0
    upper: float = math.inf


class LinkedWater(BaseModel):
    model_config = ConfigDict(frozen=True)
    var_ids: Tuple[int, ...]


WaterMode = Union[FixedWater, CouplingWater, LinkedWater]


@dataclass
class MemVarMap:
    """Variable ids of one MEM model, indexed [unit][t] or [t]"""
    scenario: Scenario
    gen_power: Dict[str, List[int]] = field(default_factory=dict)
    gen_on: Dict[str, List[int]] = field(default_factory=dict)
    es_charge: Dict[str, List[int]] = field(default_factory=dict)
    es_discharge: Dict[str, List[int]] = field(default_factory=dict)
    es_charging: Dict[str, List[int]] = field(default_factory=dict)
    es_discharging: Dict[str, List[int]] = field(default_factory=dict)
    es_level: Dict[str, List[int]] = field(default_factory=dict)
    grid_import: List[int] = field(default_factory=list)
    grid_export: List[int] = field(default_factory=list)
    importing: List[int] = field(default_factory=list)
    exporting: List[int] = field(default_factory=list)
    # coupling/linked modes only
    water: List[int] = field(default_factory=list)
    fixed_water: Optional[Tuple[float, ...]] = None

    def binary_count(self) -> int:
        groups = [*self.gen_on.values(), *self.es_charging.values(), *self.es_discharging.values(),
                  self.importing, self.exporting]
        return sum(len(g) for g in groups)


class CostBreakdown(BaseModel):
    no_load: float = 0.0
    energy: float = 0.0
    import_cost: float = 0.0
    export_revenue: float = 0.0

    @property
    def total(self) -> float:
        return self.no_load + self.energy + self.import_cost - self.export_revenue


class MemDispatch(BaseModel):
    """Physical microgrid dispatch; series are per time step"""
    generator_power: Dict[str, Tuple[float, ...]] = {}
    generator_on: Dict[str, Tuple[int, ...]] = {}
    storage_charge: Dict[str, Tuple[float, ...]] = {}
    storage_discharge: Dict[str, Tuple[float, ...]] = {}
    storage_level: Dict[str, Tuple[float, ...]] = {}
    grid_import: Tuple[float, ...] = ()
    grid_export: Tuple[float, ...] = ()
    water_power: Tuple[float, ...] = ()
    cost: CostBreakdown = CostBreakdown()

    @property
    def total_cost(self) -> float:
        return self.cost.total


def _water_series(scenario: Scenario, mode: WaterMode) -> Optional[Tuple[float, ...]]:
    if isinstance(mode, FixedWater):
        if len(mode.series) != scenario.horizon:
            raise ModelBuildError(f"Fixed water series has length {len(mode.series)}, horizon is {scenario.horizon}")
        return tuple(float(v) for v in mode.series)
    return None


def build_mem(
    scenario: Scenario,
    water_mode: WaterMode,
    model: Optional[ModelIR] = None,
) -> Tuple[ModelIR, MemVarMap]:
    """
    Build the MEM MILP; objective is the operating cost scaled by the step length

    Args:
        scenario: Validated scenario
        water_mode: How water consumption enters the power balance
        model: Existing model to extend (centralized build), else a new one

    Returns:
        (model, variable map)
    """
    model = model if model is not None else ModelIR(f"mem-{scenario.name}")
    T, dt = scenario.horizon, scenario.dt
    vm = MemVarMap(scenario=scenario, fixed_water=_water_series(scenario, water_mode))

    for gen in scenario.generators:
        vm.gen_power[gen.name], vm.gen_on[gen.name] = [], []
        for t in range(T):
            p = model.add_variable(name=f"P_G[{gen.name},{t}]", lower=0.0, upper=gen.p_max)
            u = model.add_variable(name=f"u_G[{gen.name},{t}]", binary=True)
            model.add_linear_constraint([(p, 1.0), (u, -gen.p_min)], Sense.GE, 0.0, tag=tags.GEN_LIMITS)
            model.add_linear_constraint([(p, 1.0), (u, -gen.p_max)], Sense.LE, 0.0, tag=tags.GEN_LIMITS)
            model.add_objective_term(u, dt * gen.no_load_cost)
            model.add_objective_term(p, dt * gen.marginal_cost)
            vm.gen_power[gen.name].append(p)
            vm.gen_on[gen.name].append(u)

    for es in scenario.storage:
        for store in (vm.es_charge, vm.es_discharge, vm.es_charging, vm.es_discharging, vm.es_level):
            store[es.name] = []
        previous = None
        for t in range(T):
            pc = model.add_variable(name=f"P_ESc[{es.name},{t}]", lower=0.0, upper=es.rated_power)
            pd = model.add_variable(name=f"P_ESd[{es.name},{t}]", lower=0.0, upper=es.rated_power)
            ec = model.add_variable(name=f"e_ESc[{es.name},{t}]", binary=True)
            ed = model.add_variable(name=f"e_ESd[{es.name},{t}]", binary=True)
            # level bounds are variable bounds
            level = model.add_variable(name=f"EL[{es.name},{t}]", lower=es.level_min, upper=es.level_max)
            model.add_linear_constraint([(pc, 1.0), (ec, -es.rated_power)], Sense.LE, 0.0, tag=tags.STORAGE_CHARGE_RATE)
            model.add_linear_constraint([(pd, 1.0), (ed, -es.rated_power)], Sense.LE, 0.0, tag=tags.STORAGE_DISCHARGE_RATE)
            model.add_linear_constraint([(ec, 1.0), (ed, 1.0)], Sense.LE, 1.0, tag=tags.STORAGE_EXCLUSIVITY)
            dynamics = [(level, 1.0), (pc, -dt * es.eff_charge), (pd, dt / es.eff_discharge)]
            if previous is None:
                model.add_linear_constraint(dynamics, Sense.EQ, es.level_initial, tag=tags.STORAGE_DYNAMICS)
            else:
                model.add_linear_constraint(dynamics + [(previous, -1.0)], Sense.EQ, 0.0, tag=tags.STORAGE_DYNAMICS)
            previous = level
            vm.es_charge[es.name].append(pc)
            vm.es_discharge[es.name].append(pd)
            vm.es_charging[es.name].append(ec)
            vm.es_discharging[es.name].append(ed)
            vm.es_level[es.name].append(level)
        if scenario.options.terminal_storage:
            model.add_linear_constraint([(previous, 1.0)], Sense.GE, es.level_initial, tag=tags.STORAGE_TERMINAL)

    tie = scenario.grid.tie_limit
    for t in range(T):
        # islanded: tie_limit 0 pins both flows to zero, the rows stay as written
        gi = model.add_variable(name=f"P_grid+[{t}]", lower=0.0, upper=tie)
        ge = model.add_variable(name=f"P_grid-[{t}]", lower=0.0, upper=tie)
        pi = model.add_variable(name=f"p+[{t}]", binary=True)
        pe = model.add_variable(name=f"p-[{t}]", binary=True)
        model.add_linear_constraint([(gi, 1.0), (pi, -tie)], Sense.LE, 0.0, tag=tags.TIE_IMPORT)
        model.add_linear_constraint([(ge, 1.0), (pe, -tie)], Sense.LE, 0.0, tag=tags.TIE_EXPORT)
        model.add_linear_constraint([(pi, 1.0), (pe, 1.0)], Sense.LE, 1.0, tag=tags.TIE_EXCLUSIVITY)
        model.add_objective_term(gi, dt * scenario.grid.import_price[t])
        model.add_objective_term(ge, -dt * scenario.grid.export_price[t])
        vm.grid_import.append(gi)
        vm.grid_export.append(ge)
        vm.importing.append(pi)
        vm.exporting.append(pe)

    if isinstance(water_mode, CouplingWater):
        vm.water = [model.add_variable(name=f"P_E_water[{t}]", lower=water_mode.lower, upper=water_mode.upper)
                    for t in range(T)]
    elif isinstance(water_mode, LinkedWater):
        if len(water_mode.var_ids) != T:
            raise ModelBuildError(f"Linked water has {len(water_mode.var_ids)} variables, horizon is {T}")
        vm.water = list(water_mode.var_ids)

    for t in range(T):
        row: List[Tuple[int, float]] = [(vm.gen_power[g.name][t], 1.0) for g in scenario.generators]
        for es in scenario.storage:
            row += [(vm.es_discharge[es.name][t], 1.0), (vm.es_charge[es.name][t], -1.0)]
        row += [(vm.grid_import[t], 1.0), (vm.grid_export[t], -1.0)]
        rhs = scenario.profiles.power_demand[t] - scenario.profiles.renewables[t]
        if vm.water:
            row.append((vm.water[t], -1.0))
        elif vm.fixed_water is not None:
            rhs += vm.fixed_water[t]
        model.add_linear_constraint(row, Sense.EQ, rhs, tag=tags.POWER_BALANCE, name=f"balance[{t}]")

    logger.debug(
        f"Built MEM for '{scenario.name}': {model.num_variables} variables, "
        f"{model.num_constraints} constraints, {vm.binary_count()} binaries"
    )
    return model, vm


def mem_cost(dispatch: MemDispatch, scenario: Scenario) -> CostBreakdown:
    """Operating cost of a dispatch: dt * sum(NL*u + C*P + import - export revenue)"""
    T, dt = scenario.horizon, scenario.dt
    series = [dispatch.grid_import, dispatch.grid_export, scenario.grid.import_price, scenario.grid.export_price]
    series += list(dispatch.generator_power.values()) + list(dispatch.generator_on.values())
    for values in series:
        if len(values) != T:
            raise ModelBuildError(f"Series of length {len(values)} does not match horizon {T}")

    breakdown = CostBreakdown()
    for gen in scenario.generators:
        power = dispatch.generator_power.get(gen.name, (0.0,) * T)
        on = dispatch.generator_on.get(gen.name, (0,) * T)
        breakdown.no_load += dt * gen.no_load_cost * math.fsum(on)
        breakdown.energy += dt * gen.marginal_cost * math.fsum(power)
    breakdown.import_cost = dt * math.fsum(p * c for p, c in zip(dispatch.grid_import, scenario.grid.import_price))
    breakdown.export_revenue = dt * math.fsum(p * c for p, c in zip(dispatch.grid_export, scenario.grid.export_price))
    return breakdown


def _binary(value: float) -> int:
    return 1 if value > 0.5 else 0


def extract_mem_solution(var_map: MemVarMap, assignment: Sequence[float]) -> MemDispatch:
    """
    Read a dispatch out of a solved assignment and cross-check it

    Storage levels are recomputed from the charge/discharge series and must
    match the solved levels.

    Raises:
        ExtractionError: exclusivity or level dynamics violated
    """
    scenario = var_map.scenario
    T, dt = scenario.horizon, scenario.dt

    def series(ids: List[int]) -> Tuple[float, ...]:
        return tuple(float(assignment[i]) for i in ids)

    storage_level: Dict[str, Tuple[float, ...]] = {}
    for es in scenario.storage:
        charging = [_binary(assignment[i]) for i in var_map.es_charging[es.name]]
        discharging = [_binary(assignment[i]) for i in var_map.es_discharging[es.name]]
        for t in range(T):
            if charging[t] and discharging[t]:
                raise tags.violation(f"Storage '{es.name}' charges and discharges at step {t}", tags.STORAGE_EXCLUSIVITY)
        charge = series(var_map.es_charge[es.name])
        discharge = series(var_map.es_discharge[es.name])
        solved = series(var_map.es_level[es.name])
        level, levels = es.level_initial, []
        for t in range(T):
            level = level + dt * (es.eff_charge * charge[t] - discharge[t] / es.eff_discharge)
            if abs(level - solved[t]) > CHECK_TOL * max(1.0, abs(level)):
                raise tags.violation(
                    f"Storage '{es.name}' level at step {t} is {solved[t]:.9g}, dynamics give {level:.9g}",
                    tags.STORAGE_DYNAMICS,
                )
            levels.append(level)
        storage_level[es.name] = tuple(levels)

    importing = [_binary(assignment[i]) for i in var_map.importing]
    exporting = [_binary(assignment[i]) for i in var_map.exporting]
    for t in range(T):
        if importing[t] and exporting[t]:
            raise tags.violation(f"Grid imports and exports at step {t}", tags.TIE_EXCLUSIVITY)

    if var_map.water:
        water = series(var_map.water)
    else:
        water = var_map.fixed_water or tuple(0.0 for _ in range(T))

    dispatch = MemDispatch(
        generator_power={g: series(ids) for g, ids in var_map.gen_power.items()},
        generator_on={g: tuple(_binary(assignment[i]) for i in ids) for g, ids in var_map.gen_on.items()},
        storage_charge={b: series(ids) for b, ids in var_map.es_charge.items()},
        storage_discharge={b: series(ids) for b, ids in var_map.es_discharge.items()},
        storage_level=storage_level,
        grid_import=series(var_map.grid_import),
        grid_export=series(var_map.grid_export),
        water_power=water,
    )
    return dispatch.model_copy(update={"cost": mem_cost(dispatch, scenario)})


def balance_residuals(dispatch: MemDispatch, scenario: Scenario) -> List[float]:
    """Supply minus net load at each step"""
    residuals = []
    for t in range(scenario.horizon):
        supply = math.fsum(p[t] for p in dispatch.generator_power.values())
        supply += math.fsum(dispatch.storage_discharge[b][t] - dispatch.storage_charge[b][t] for b in dispatch.storage_charge)
        supply += dispatch.grid_import[t] - dispatch.grid_export[t]
        demand = scenario.profiles.power_demand[t] - scenario.profiles.renewables[t] + dispatch.water_power[t]
        residuals.append(supply - demand)
    return residuals
