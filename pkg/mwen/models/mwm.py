"""
Micro water management model.

Wastewater treatment fed from a reclaim reservoir, further treatment units,
storage tanks with exclusive charge/discharge, the hourly water balance, and
the water system's power draw: treatment energy intensity plus one fitted
pump curve per unit. Pump power is tied to its driving flow with an exact
piecewise-linear equality.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from mwen.core.errors import ModelBuildError
from mwen.model_ir import ModelIR, Sense
from mwen.pwl import PwlCurve, emit_pwl_equality, eval_pwl
from mwen.scenario.models import Scenario, pump_ids
from . import tags
from .coupling import AugmentedTerms, add_augmented_terms

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-6


class MinEnergy(BaseModel):
    """Own objective of the water operator: dt * sum(P_water)"""

    model_config = ConfigDict(frozen=True)
    weight: float = Field(default=1.0, ge=0)


MwmObjective = Union[MinEnergy, AugmentedTerms]


@dataclass
class MwmVarMap:
    scenario: Scenario
    curves: Dict[str, PwlCurve]
    ww_flow: List[int] = field(default_factory=list)
    ww_on: List[int] = field(default_factory=list)
    ww_level: List[int] = field(default_factory=list)
    ww_power: List[int] = field(default_factory=list)
    wt_flow: Dict[str, List[int]] = field(default_factory=dict)
    wt_on: Dict[str, List[int]] = field(default_factory=dict)
    wt_power: Dict[str, List[int]] = field(default_factory=dict)
    st_charge: Dict[str, List[int]] = field(default_factory=dict)
    st_discharge: Dict[str, List[int]] = field(default_factory=dict)
    st_charging: Dict[str, List[int]] = field(default_factory=dict)
    st_discharging: Dict[str, List[int]] = field(default_factory=dict)
    st_level: Dict[str, List[int]] = field(default_factory=dict)
    # pump id -> driving flow / pump power per step
    pump_flow: Dict[str, List[int]] = field(default_factory=dict)
    pump_power: Dict[str, List[int]] = field(default_factory=dict)
    water_power: List[int] = field(default_factory=list)
    penalty: List[int] = field(default_factory=list)

    def status_binaries(self) -> int:
        groups = [self.ww_on, *self.wt_on.values(), *self.st_charging.values(), *self.st_discharging.values()]
        return sum(len(g) for g in groups)


class WaterDispatch(BaseModel):
    """Physical water dispatch; series are per time step"""

    wastewater_flow: Tuple[float, ...] = ()
    wastewater_on: Tuple[int, ...] = ()
    reservoir_level: Tuple[float, ...] = ()
    treatment_flow: Dict[str, Tuple[float, ...]] = {}
    treatment_on: Dict[str, Tuple[int, ...]] = {}
    tank_charge: Dict[str, Tuple[float, ...]] = {}
    tank_discharge: Dict[str, Tuple[float, ...]] = {}
    tank_level: Dict[str, Tuple[float, ...]] = {}
    pump_power: Dict[str, Tuple[float, ...]] = {}
    power: Tuple[float, ...] = ()
    dt: float = 1.0

    @property
    def energy_kwh(self) -> float:
        return self.dt * math.fsum(self.power)


def curve_range(curve: PwlCurve) -> Tuple[float, float]:
    """Smallest and largest value of a max-affine curve over its domain (attained at knots)"""
    values = [curve.value(w) for w in curve.knots()]
    return min(values), max(values)


def water_power_bounds(scenario: Scenario, curves: Mapping[str, PwlCurve]) -> Tuple[float, float]:
    """
    Physical range of the water system's power draw at any step

    The upper end has every unit at maximum flow and every pump at its curve
    maximum; the lower end has treatment off and pumps at their curve minimum.
    """
    _check_curves(scenario, curves)
    hi = 0.0
    if scenario.wastewater is not None:
        hi += scenario.wastewater.energy_intensity * scenario.wastewater.flow_max
    hi += math.fsum(u.energy_intensity * u.flow_max for u in scenario.treatment)
    lo = math.fsum(curve_range(curves[p])[0] for p in pump_ids(scenario))
    hi += math.fsum(curve_range(curves[p])[1] for p in pump_ids(scenario))
    return min(lo, 0.0), max(hi, 0.0)


def _check_curves(scenario: Scenario, curves: Mapping[str, PwlCurve]) -> None:
    missing = [p for p in pump_ids(scenario) if p not in curves]
    if missing:
        raise ModelBuildError(f"No fitted curve for pumps: {', '.join(missing)}")


def _driver_flow(scenario: Scenario, charge: float, discharge: float) -> float:
    if scenario.options.tank_pump_driver == "charge_and_discharge":
        return charge + discharge
    return discharge


def build_mwm(
    scenario: Scenario,
    curves: Mapping[str, PwlCurve],
    objective: Optional[MwmObjective] = None,
    model: Optional[ModelIR] = None,
    energy_weight: float = 0.0,
) -> Tuple[ModelIR, MwmVarMap]:
    """
    Build the MWM MILP

    Args:
        scenario: Validated scenario
        curves: Fitted curve per pump id
        objective: ``MinEnergy`` (default), ``AugmentedTerms`` for the ADMM
            subproblem, or None to add no objective terms (centralized model)
        model: Existing model to extend
        energy_weight: Tie-break weight on dt * sum(P_water) in ADMM mode

    Returns:
        (model, variable map)
    """
    _check_curves(scenario, curves)
    model = model if model is not None else ModelIR(f"mwm-{scenario.name}")
    T, dt = scenario.horizon, scenario.dt
    vm = MwmVarMap(scenario=scenario, curves=dict(curves))
    power_lo, power_hi = water_power_bounds(scenario, curves)

    ww = scenario.wastewater
    if ww is not None:
        previous = None
        for t in range(T):
            flow = model.add_variable(name=f"W_WW[{t}]", lower=0.0, upper=ww.flow_max)
            on = model.add_variable(name=f"u_WW[{t}]", binary=True)
            level = model.add_variable(name=f"WL_WW[{t}]", lower=0.0, upper=ww.reservoir_cap)
            power = model.add_variable(name=f"P_WW[{t}]", lower=0.0, upper=ww.energy_intensity * ww.flow_max)
            model.add_linear_constraint([(flow, 1.0), (on, -ww.flow_min)], Sense.GE, 0.0, tag=tags.WW_FLOW)
            model.add_linear_constraint([(flow, 1.0), (on, -ww.flow_max)], Sense.LE, 0.0, tag=tags.WW_FLOW)
            dynamics = [(level, 1.0), (flow, dt)]
            if previous is None:
                model.add_linear_constraint(dynamics, Sense.EQ, ww.reservoir_initial + dt * ww.reclaim_rate[t], tag=tags.RESERVOIR_DYNAMICS)
            else:
                model.add_linear_constraint(dynamics + [(previous, -1.0)], Sense.EQ, dt * ww.reclaim_rate[t], tag=tags.RESERVOIR_DYNAMICS)
            model.add_linear_constraint([(power, 1.0), (flow, -ww.energy_intensity)], Sense.EQ, 0.0, tag=tags.WW_POWER)
            previous = level
            vm.ww_flow.append(flow)
            vm.ww_on.append(on)
            vm.ww_level.append(level)
            vm.ww_power.append(power)
        vm.pump_flow["wastewater"] = list(vm.ww_flow)

    for unit in scenario.treatment:
        vm.wt_flow[unit.name], vm.wt_on[unit.name], vm.wt_power[unit.name] = [], [], []
        for t in range(T):
            flow = model.add_variable(name=f"W_WT[{unit.name},{t}]", lower=0.0, upper=unit.flow_max)
            on = model.add_variable(name=f"u_WT[{unit.name},{t}]", binary=True)
            power = model.add_variable(name=f"P_WT[{unit.name},{t}]", lower=0.0, upper=unit.energy_intensity * unit.flow_max)
            model.add_linear_constraint([(flow, 1.0), (on, -unit.flow_min)], Sense.GE, 0.0, tag=tags.TREATMENT_FLOW)
            model.add_linear_constraint([(flow, 1.0), (on, -unit.flow_max)], Sense.LE, 0.0, tag=tags.TREATMENT_FLOW)
            model.add_linear_constraint([(power, 1.0), (flow, -unit.energy_intensity)], Sense.EQ, 0.0, tag=tags.TREATMENT_POWER)
            vm.wt_flow[unit.name].append(flow)
            vm.wt_on[unit.name].append(on)
            vm.wt_power[unit.name].append(power)
        vm.pump_flow[f"treatment:{unit.name}"] = list(vm.wt_flow[unit.name])

    for tank in scenario.tanks:
        for store in (vm.st_charge, vm.st_discharge, vm.st_charging, vm.st_discharging, vm.st_level):
            store[tank.name] = []
        previous = None
        drivers = []
        for t in range(T):
            charge = model.add_variable(name=f"W_STc[{tank.name},{t}]", lower=0.0, upper=tank.inflow_max)
            discharge = model.add_variable(name=f"W_STd[{tank.name},{t}]", lower=0.0, upper=tank.outflow_max)
            charging = model.add_variable(name=f"s_STc[{tank.name},{t}]", binary=True)
            discharging = model.add_variable(name=f"s_STd[{tank.name},{t}]", binary=True)
            level = model.add_variable(name=f"WL_ST[{tank.name},{t}]", lower=tank.level_min, upper=tank.level_max)
            # inflow minimum applies only while charging
            model.add_linear_constraint([(charge, 1.0), (charging, -tank.inflow_min)], Sense.GE, 0.0, tag=tags.TANK_INFLOW)
            model.add_linear_constraint([(charge, 1.0), (charging, -tank.inflow_max)], Sense.LE, 0.0, tag=tags.TANK_INFLOW)
            model.add_linear_constraint([(discharge, 1.0), (discharging, -tank.outflow_max)], Sense.LE, 0.0, tag=tags.TANK_OUTFLOW)
            model.add_linear_constraint([(charging, 1.0), (discharging, 1.0)], Sense.LE, 1.0, tag=tags.TANK_EXCLUSIVITY)
            dynamics = [(level, 1.0), (charge, -dt), (discharge, dt)]
            if previous is None:
                model.add_linear_constraint(dynamics, Sense.EQ, tank.level_initial, tag=tags.TANK_DYNAMICS)
            else:
                model.add_linear_constraint(dynamics + [(previous, -1.0)], Sense.EQ, 0.0, tag=tags.TANK_DYNAMICS)
            previous = level
            if scenario.options.tank_pump_driver == "charge_and_discharge":
                driver = model.add_variable(name=f"W_drv[{tank.name},{t}]", lower=0.0, upper=max(tank.inflow_max, tank.outflow_max))
                model.add_linear_constraint([(driver, 1.0), (charge, -1.0), (discharge, -1.0)], Sense.EQ, 0.0, tag=tags.PUMP_CURVE)
                drivers.append(driver)
            else:
                drivers.append(discharge)
            vm.st_charge[tank.name].append(charge)
            vm.st_discharge[tank.name].append(discharge)
            vm.st_charging[tank.name].append(charging)
            vm.st_discharging[tank.name].append(discharging)
            vm.st_level[tank.name].append(level)
        if scenario.options.terminal_storage:
            model.add_linear_constraint([(previous, 1.0)], Sense.GE, tank.level_initial, tag=tags.TANK_TERMINAL)
        vm.pump_flow[f"tank:{tank.name}"] = drivers

    for pump_id in pump_ids(scenario):
        curve = curves[pump_id]
        lo, hi = curve_range(curve)
        vm.pump_power[pump_id] = []
        for t in range(T):
            power = model.add_variable(name=f"P_pump[{pump_id},{t}]", lower=lo, upper=hi)
            emit_pwl_equality(model, curve, vm.pump_flow[pump_id][t], power, tag=tags.PUMP_CURVE)
            vm.pump_power[pump_id].append(power)

    for t in range(T):
        supply: List[Tuple[int, float]] = []
        if ww is not None:
            supply.append((vm.ww_flow[t], 1.0))
        supply += [(vm.wt_flow[u.name][t], 1.0) for u in scenario.treatment]
        for tank in scenario.tanks:
            supply += [(vm.st_discharge[tank.name][t], 1.0), (vm.st_charge[tank.name][t], -1.0)]
        demand = scenario.profiles.water_demand[t]
        if supply:
            model.add_linear_constraint(supply, Sense.EQ, demand, tag=tags.WATER_BALANCE, name=f"water[{t}]")
        elif demand > 0:
            raise ModelBuildError(f"Water demand {demand} at step {t} but the scenario has no water sources")

        total = model.add_variable(name=f"P_W_water[{t}]", lower=power_lo, upper=power_hi)
        row: List[Tuple[int, float]] = [(total, 1.0)]
        if ww is not None:
            row.append((vm.ww_power[t], -1.0))
        row += [(vm.wt_power[u.name][t], -1.0) for u in scenario.treatment]
        row += [(vm.pump_power[p][t], -1.0) for p in pump_ids(scenario)]
        model.add_linear_constraint(row, Sense.EQ, 0.0, tag=tags.WATER_POWER, name=f"water_power[{t}]")
        vm.water_power.append(total)

    if isinstance(objective, MinEnergy):
        for var in vm.water_power:
            model.add_objective_term(var, dt * objective.weight)
    elif isinstance(objective, AugmentedTerms):
        vm.penalty = add_augmented_terms(model, vm.water_power, objective)
        if energy_weight:
            for var in vm.water_power:
                model.add_objective_term(var, dt * energy_weight)

    logger.debug(
        f"Built MWM for '{scenario.name}': {model.num_variables} variables, "
        f"{model.num_constraints} constraints, {len(model.binary_ids())} binaries"
    )
    return model, vm


def water_power(dispatch: WaterDispatch, scenario: Scenario, curves: Mapping[str, PwlCurve]) -> List[float]:
    """
    Power draw per step recomputed from flows: intensities plus pump curves

    Raises:
        ModelBuildError: a driving flow lies outside its pump curve domain
    """
    _check_curves(scenario, curves)
    T = scenario.horizon

    def pump(pump_id: str, flow: float) -> float:
        lo, hi = curves[pump_id].domain
        tol = CHECK_TOL * max(1.0, abs(hi))
        if flow < lo - tol or flow > hi + tol:
            raise ModelBuildError(f"Flow {flow} outside domain [{lo}, {hi}] of pump '{pump_id}'")
        return eval_pwl(curves[pump_id], min(max(flow, lo), hi))

    powers = []
    for t in range(T):
        terms: List[float] = []
        if scenario.wastewater is not None:
            flow = dispatch.wastewater_flow[t]
            terms += [scenario.wastewater.energy_intensity * flow, pump("wastewater", flow)]
        for unit in scenario.treatment:
            flow = dispatch.treatment_flow[unit.name][t]
            terms += [unit.energy_intensity * flow, pump(f"treatment:{unit.name}", flow)]
        for tank in scenario.tanks:
            charge = dispatch.tank_charge[tank.name][t]
            discharge = dispatch.tank_discharge[tank.name][t]
            terms.append(pump(f"tank:{tank.name}", _driver_flow(scenario, charge, discharge)))
        powers.append(math.fsum(terms))
    return powers


def _binary(value: float) -> int:
    return 1 if value > 0.5 else 0


def _mismatch(expected: float, actual: float) -> bool:
    return abs(expected - actual) > CHECK_TOL * max(1.0, abs(expected))


def extract_mwm_solution(var_map: MwmVarMap, assignment: Sequence[float]) -> WaterDispatch:
    """
    Read a water dispatch out of a solved assignment and cross-check it

    Reservoir and tank levels are recomputed from the flows, and each pump's
    power must equal its curve at the driving flow.

    Raises:
        ExtractionError: exclusivity, level dynamics or pump curve violated
    """
    scenario = var_map.scenario
    T, dt = scenario.horizon, scenario.dt

    def series(ids: List[int]) -> Tuple[float, ...]:
        return tuple(float(assignment[i]) for i in ids)

    reservoir: Tuple[float, ...] = ()
    ww = scenario.wastewater
    if ww is not None:
        flows, solved = series(var_map.ww_flow), series(var_map.ww_level)
        level, levels = ww.reservoir_initial, []
        for t in range(T):
            level += dt * (ww.reclaim_rate[t] - flows[t])
            if _mismatch(level, solved[t]):
                raise tags.violation(f"Reservoir level at step {t} is {solved[t]:.9g}, dynamics give {level:.9g}", tags.RESERVOIR_DYNAMICS)
            levels.append(level)
        reservoir = tuple(levels)

    tank_level: Dict[str, Tuple[float, ...]] = {}
    for tank in scenario.tanks:
        charging = [_binary(assignment[i]) for i in var_map.st_charging[tank.name]]
        discharging = [_binary(assignment[i]) for i in var_map.st_discharging[tank.name]]
        charge, discharge = series(var_map.st_charge[tank.name]), series(var_map.st_discharge[tank.name])
        solved = series(var_map.st_level[tank.name])
        level, levels = tank.level_initial, []
        for t in range(T):
            if charging[t] and discharging[t]:
                raise tags.violation(f"Tank '{tank.name}' fills and drains at step {t}", tags.TANK_EXCLUSIVITY)
            level += dt * (charge[t] - discharge[t])
            if _mismatch(level, solved[t]):
                raise tags.violation(
                    f"Tank '{tank.name}' level at step {t} is {solved[t]:.9g}, dynamics give {level:.9g}",
                    tags.TANK_DYNAMICS,
                )
            levels.append(level)
        tank_level[tank.name] = tuple(levels)

    pump_power = {p: series(ids) for p, ids in var_map.pump_power.items()}
    for pump_id, powers in pump_power.items():
        curve = var_map.curves[pump_id]
        flows = series(var_map.pump_flow[pump_id])
        for t in range(T):
            expected = curve.value(min(max(flows[t], curve.domain[0]), curve.domain[1]))
            if _mismatch(expected, powers[t]):
                raise tags.violation(
                    f"Pump '{pump_id}' draws {powers[t]:.9g} kW at flow {flows[t]:.9g}, curve gives {expected:.9g}",
                    tags.PUMP_CURVE,
                )

    return WaterDispatch(
        wastewater_flow=series(var_map.ww_flow),
        wastewater_on=tuple(_binary(assignment[i]) for i in var_map.ww_on),
        reservoir_level=reservoir,
        treatment_flow={u: series(ids) for u, ids in var_map.wt_flow.items()},
        treatment_on={u: tuple(_binary(assignment[i]) for i in ids) for u, ids in var_map.wt_on.items()},
        tank_charge={k: series(ids) for k, ids in var_map.st_charge.items()},
        tank_discharge={k: series(ids) for k, ids in var_map.st_discharge.items()},
        tank_level=tank_level,
        pump_power=pump_power,
        power=series(var_map.water_power),
        dt=dt,
    )


def water_balance_residuals(dispatch: WaterDispatch, scenario: Scenario) -> List[float]:
    """Delivered water minus demand at each step"""
    residuals = []
    for t in range(scenario.horizon):
        delivered = dispatch.wastewater_flow[t] if dispatch.wastewater_flow else 0.0
        delivered += math.fsum(f[t] for f in dispatch.treatment_flow.values())
        delivered += math.fsum(dispatch.tank_discharge[k][t] - dispatch.tank_charge[k][t] for k in dispatch.tank_charge)
        residuals.append(delivered - scenario.profiles.water_demand[t])
    return residuals
