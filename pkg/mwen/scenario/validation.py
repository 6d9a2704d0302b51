"""
Scenario Validator

Checks a raw scenario record (parsed JSON) against the file schema and the
physical ordering rules, applies documented defaults, and returns an
immutable ``Scenario``. Every violation is collected before failing.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from jsonschema import Draft202012Validator
from pydantic import ValidationError

from mwen.core.errors import ScenarioValidationError
from .models import (
    EnergyStorageSpec,
    GeneratorSpec,
    GridTieSpec,
    Profiles,
    PumpQuadratic,
    Scenario,
    ScenarioOptions,
    StorageTankSpec,
    TimeGrid,
    TreatmentUnitSpec,
    WastewaterSpec,
)
from .schema import SCENARIO_SCHEMA

logger = logging.getLogger(__name__)

# initial storage levels default to this share of capacity
DEFAULT_INITIAL_SHARE = 0.5

UNSERVABLE_WARNING = "unservable scenario"


def derive_directional_efficiencies(round_trip: float) -> Tuple[float, float]:
    """
    Split a round-trip efficiency equally between charge and discharge

    Args:
        round_trip: Round-trip efficiency in (0, 1]

    Returns:
        (eff_charge, eff_discharge), both sqrt(round_trip)
    """
    if not (isinstance(round_trip, (int, float)) and 0 < round_trip <= 1):
        raise ScenarioValidationError(
            [f"round_trip_efficiency: must be in (0, 1], got {round_trip}"]
        )
    eff = math.sqrt(round_trip)
    return eff, eff


def net_load(
    power_demand: Union[float, Sequence[float]],
    renewables: Union[float, Sequence[float]],
    water_power: Union[float, Sequence[float]],
    t: Optional[int] = None,
) -> float:
    """Net load P_L - P_RES + P_water at step t (or of scalars when t is None)"""
    if t is None:
        return float(power_demand) - float(renewables) + float(water_power)
    return float(power_demand[t]) - float(renewables[t]) + float(water_power[t])


class ScenarioValidator:
    """Validates raw scenario records"""

    def __init__(self):
        self._schema = Draft202012Validator(SCENARIO_SCHEMA)

    def validate(self, record: Dict[str, Any]) -> Tuple[bool, List[str]]:
        """
        Check a record without building a Scenario

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        errors = self._schema_errors(record)
        if errors:
            return False, errors
        errors.extend(self._validate_time(record))
        horizon = record["time"]["horizon_steps"]
        errors.extend(self._validate_generators(record["generators"]))
        errors.extend(self._validate_storage(record["storage"]))
        errors.extend(self._validate_grid(record, horizon))
        if record["wastewater"] is not None:
            errors.extend(self._validate_wastewater(record["wastewater"], horizon))
        errors.extend(self._validate_treatment(record["treatment"]))
        errors.extend(self._validate_tanks(record["tanks"]))
        errors.extend(self._validate_profiles(record["profiles"], horizon))
        return len(errors) == 0, errors

    def build(self, record: Dict[str, Any]) -> Scenario:
        """Validate and construct the Scenario, raising on any violation"""
        if isinstance(record, Scenario):
            record = record.to_record()
        is_valid, errors = self.validate(record)
        if not is_valid:
            raise ScenarioValidationError(errors)

        horizon = record["time"]["horizon_steps"]
        try:
            scenario = Scenario(
                name=record.get("name", "scenario"),
                description=record.get("description", ""),
                time=TimeGrid(**record["time"]),
                generators=tuple(GeneratorSpec(**g) for g in record["generators"]),
                storage=tuple(self._storage_spec(s) for s in record["storage"]),
                grid=self._grid_spec(record, horizon),
                wastewater=self._wastewater_spec(record["wastewater"]),
                treatment=tuple(self._treatment_spec(u) for u in record["treatment"]),
                tanks=tuple(self._tank_spec(k) for k in record["tanks"]),
                profiles=Profiles(
                    power_demand=tuple(record["profiles"]["power_demand"]),
                    renewables=tuple(record["profiles"].get("renewables") or [0.0] * horizon),
                    water_demand=tuple(record["profiles"]["water_demand"]),
                ),
                options=ScenarioOptions(**record.get("options", {})),
            )
        except ValidationError as e:
            raise ScenarioValidationError(
                [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
            )

        warnings = self._warnings(scenario)
        for message in warnings:
            logger.warning(f"Scenario '{scenario.name}': {message}")
        if scenario.wastewater is not None and scenario.wastewater.energy_intensity > 10:
            logger.info(
                f"Scenario '{scenario.name}': wastewater energy intensity "
                f"{scenario.wastewater.energy_intensity} kWh/m3 is far above typical plant values"
            )
        return scenario.model_copy(update={"warnings": tuple(warnings)})

    def _schema_errors(self, record: Any) -> List[str]:
        errors = []
        for err in sorted(self._schema.iter_errors(record), key=lambda e: list(map(str, e.path))):
            location = ".".join(str(p) for p in err.path) or "<root>"
            errors.append(f"{location}: {err.message}")
        return errors

    def _validate_time(self, record: Dict[str, Any]) -> List[str]:
        errors = []
        time = record["time"]
        if time["horizon_steps"] < 1:
            errors.append(f"time.horizon_steps: must be >= 1, got {time['horizon_steps']}")
        if time["step_hours"] <= 0:
            errors.append(f"time.step_hours: must be > 0, got {time['step_hours']}")
        return errors

    def _validate_generators(self, generators: List[Dict[str, Any]]) -> List[str]:
        errors = self._unique_names("generators", generators)
        for i, gen in enumerate(generators):
            where = f"generators[{i}]"
            if gen["p_min"] < 0:
                errors.append(f"{where}.p_min: must be >= 0, got {gen['p_min']}")
            if gen["p_min"] > gen["p_max"]:
                errors.append(f"{where}.p_min: {gen['p_min']} exceeds p_max {gen['p_max']}")
            for key in ("no_load_cost", "marginal_cost"):
                if gen[key] < 0:
                    errors.append(f"{where}.{key}: must be >= 0, got {gen[key]}")
        return errors

    def _validate_storage(self, storage: List[Dict[str, Any]]) -> List[str]:
        errors = self._unique_names("storage", storage)
        for i, unit in enumerate(storage):
            where = f"storage[{i}]"
            has_split = "eff_charge" in unit or "eff_discharge" in unit
            if "round_trip_efficiency" in unit:
                if has_split:
                    errors.append(f"{where}: give round_trip_efficiency or eff_charge/eff_discharge, not both")
                rt = unit["round_trip_efficiency"]
                if not 0 < rt <= 1:
                    errors.append(f"{where}.round_trip_efficiency: must be in (0, 1], got {rt}")
            elif "eff_charge" in unit and "eff_discharge" in unit:
                for key in ("eff_charge", "eff_discharge"):
                    if not 0 < unit[key] <= 1:
                        errors.append(f"{where}.{key}: must be in (0, 1], got {unit[key]}")
            else:
                errors.append(f"{where}: missing efficiency (round_trip_efficiency or eff_charge + eff_discharge)")
            if unit["rated_power"] < 0:
                errors.append(f"{where}.rated_power: must be >= 0, got {unit['rated_power']}")
            lo, hi = unit["level_min"], unit["level_max"]
            if lo < 0:
                errors.append(f"{where}.level_min: must be >= 0, got {lo}")
            if lo > hi:
                errors.append(f"{where}.level_min: {lo} exceeds level_max {hi}")
            init = unit.get("level_initial")
            if init is not None and not lo <= init <= hi:
                errors.append(f"{where}.level_initial: {init} outside [{lo}, {hi}]")
        return errors

    def _validate_grid(self, record: Dict[str, Any], horizon: int) -> List[str]:
        errors = []
        if record["grid"]["tie_limit"] < 0:
            errors.append(f"grid.tie_limit: must be >= 0, got {record['grid']['tie_limit']}")
        prices = record["prices"]
        errors.extend(self._series("prices.import", prices["import"], horizon))
        if "export" in prices and "export_ratio" in prices:
            errors.append("prices: give export or export_ratio, not both")
        elif "export" in prices:
            errors.extend(self._series("prices.export", prices["export"], horizon))
        elif "export_ratio" not in prices:
            errors.append("prices: missing export (series) or export_ratio")
        return errors

    def _validate_wastewater(self, ww: Dict[str, Any], horizon: int) -> List[str]:
        errors = self._flow_bounds("wastewater", ww["flow_min"], ww["flow_max"])
        errors.extend(self._series("wastewater.reclaim_rate", ww["reclaim_rate"], horizon))
        if ww["reservoir_cap"] < 0:
            errors.append(f"wastewater.reservoir_cap: must be >= 0, got {ww['reservoir_cap']}")
        init = ww.get("reservoir_initial")
        if init is not None and not 0 <= init <= ww["reservoir_cap"]:
            errors.append(f"wastewater.reservoir_initial: {init} outside [0, {ww['reservoir_cap']}]")
        if ww["energy_intensity"] < 0:
            errors.append(f"wastewater.energy_intensity: must be >= 0, got {ww['energy_intensity']}")
        errors.extend(self._pump("wastewater.pump", ww.get("pump")))
        return errors

    def _validate_treatment(self, units: List[Dict[str, Any]]) -> List[str]:
        errors = self._unique_names("treatment", units)
        for i, unit in enumerate(units):
            where = f"treatment[{i}]"
            errors.extend(self._flow_bounds(where, unit["flow_min"], unit["flow_max"]))
            if unit["energy_intensity"] < 0:
                errors.append(f"{where}.energy_intensity: must be >= 0, got {unit['energy_intensity']}")
            errors.extend(self._pump(f"{where}.pump", unit.get("pump")))
        return errors

    def _validate_tanks(self, tanks: List[Dict[str, Any]]) -> List[str]:
        errors = self._unique_names("tanks", tanks)
        for i, tank in enumerate(tanks):
            where = f"tanks[{i}]"
            errors.extend(self._flow_bounds(where, tank["inflow_min"], tank["inflow_max"], "inflow"))
            if tank["outflow_max"] < 0:
                errors.append(f"{where}.outflow_max: must be >= 0, got {tank['outflow_max']}")
            lo, hi = tank["level_min"], tank["level_max"]
            if lo < 0:
                errors.append(f"{where}.level_min: must be >= 0, got {lo}")
            if lo > hi:
                errors.append(f"{where}.level_min: {lo} exceeds level_max {hi}")
            init = tank.get("level_initial")
            if init is not None and not lo <= init <= hi:
                errors.append(f"{where}.level_initial: {init} outside [{lo}, {hi}]")
            errors.extend(self._pump(f"{where}.pump", tank.get("pump")))
        return errors

    def _validate_profiles(self, profiles: Dict[str, Any], horizon: int) -> List[str]:
        errors = []
        errors.extend(self._series("profiles.power_demand", profiles["power_demand"], horizon))
        if "renewables" in profiles:
            errors.extend(self._series("profiles.renewables", profiles["renewables"], horizon))
        errors.extend(self._series("profiles.water_demand", profiles["water_demand"], horizon))
        return errors

    def _series(self, field: str, values: List[float], horizon: int) -> List[str]:
        errors = []
        if len(values) != horizon:
            errors.append(f"{field}: length {len(values)} does not match horizon_steps {horizon}")
        negatives = [i for i, v in enumerate(values) if v < 0]
        if negatives:
            errors.append(f"{field}: values must be >= 0 (negative at steps {negatives[:5]})")
        return errors

    def _flow_bounds(self, where: str, lo: float, hi: float, prefix: str = "flow") -> List[str]:
        errors = []
        if lo < 0:
            errors.append(f"{where}.{prefix}_min: must be >= 0, got {lo}")
        if lo > hi:
            errors.append(f"{where}.{prefix}_min: {lo} exceeds {prefix}_max {hi}")
        return errors

    def _pump(self, where: str, pump: Optional[Dict[str, Any]]) -> List[str]:
        if pump and pump.get("c1", 0.0) < 0:
            return [f"{where}.c1: must be >= 0 for a convex pump curve, got {pump['c1']}"]
        return []

    def _unique_names(self, field: str, items: List[Dict[str, Any]]) -> List[str]:
        names = [item["name"] for item in items]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        return [f"{field}: duplicate name '{n}'" for n in duplicates]

    def _storage_spec(self, unit: Dict[str, Any]) -> EnergyStorageSpec:
        data = dict(unit)
        if "round_trip_efficiency" in data:
            eff_c, eff_d = derive_directional_efficiencies(data.pop("round_trip_efficiency"))
            data["eff_charge"], data["eff_discharge"] = eff_c, eff_d
        if data.get("level_initial") is None:
            data["level_initial"] = _default_level(data["level_min"], data["level_max"])
        return EnergyStorageSpec(**data)

    def _grid_spec(self, record: Dict[str, Any], horizon: int) -> GridTieSpec:
        prices = record["prices"]
        imports = tuple(float(p) for p in prices["import"])
        if "export" in prices:
            exports = tuple(float(p) for p in prices["export"])
        else:
            exports = tuple(prices["export_ratio"] * p for p in imports)
        return GridTieSpec(tie_limit=record["grid"]["tie_limit"], import_price=imports, export_price=exports)

    def _wastewater_spec(self, ww: Optional[Dict[str, Any]]) -> Optional[WastewaterSpec]:
        if ww is None:
            return None
        data = dict(ww)
        data["reclaim_rate"] = tuple(data["reclaim_rate"])
        data["pump"] = PumpQuadratic(**data.get("pump", {}))
        if data.get("reservoir_initial") is None:
            data["reservoir_initial"] = DEFAULT_INITIAL_SHARE * data["reservoir_cap"]
        return WastewaterSpec(**data)

    def _treatment_spec(self, unit: Dict[str, Any]) -> TreatmentUnitSpec:
        data = dict(unit)
        data["pump"] = PumpQuadratic(**data.get("pump", {}))
        return TreatmentUnitSpec(**data)

    def _tank_spec(self, tank: Dict[str, Any]) -> StorageTankSpec:
        data = dict(tank)
        data["pump"] = PumpQuadratic(**data.get("pump", {}))
        if data.get("level_initial") is None:
            data["level_initial"] = _default_level(data["level_min"], data["level_max"])
        return StorageTankSpec(**data)

    def _warnings(self, scenario: Scenario) -> List[str]:
        warnings = []
        # no tie-line and no generation; storage alone does not count as a supply path
        gen_capacity = sum(g.p_max for g in scenario.generators)
        if scenario.islanded and gen_capacity == 0 and any(p > 0 for p in scenario.profiles.power_demand):
            warnings.append(UNSERVABLE_WARNING)
        if scenario.wastewater is not None:
            reclaimed = sum(scenario.wastewater.reclaim_rate)
            treatable = scenario.wastewater.flow_max * scenario.horizon
            if reclaimed > treatable:
                warnings.append(
                    f"reservoir overflow risk: total reclaim {reclaimed:.3f} m3/h-steps exceeds "
                    f"maximum wastewater treatment {treatable:.3f}"
                )
        return warnings


def _default_level(level_min: float, level_max: float) -> float:
    return max(level_min, DEFAULT_INITIAL_SHARE * level_max)


def validate_scenario(record: Union[Dict[str, Any], Scenario]) -> Scenario:
    """Validate a raw record (or re-validate a Scenario) into a Scenario"""
    return ScenarioValidator().build(record)
