"""
Scenario data model.

A ``Scenario`` is the immutable, validated description of one community: the
time grid, microgrid components, water components, demand profiles and
energy prices. Instances are produced by ``validate_scenario``; building them
directly skips the cross-field rules.
"""

from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

Series = Tuple[float, ...]


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class TimeGrid(_Frozen):
    horizon_steps: int = Field(ge=1)
    step_hours: float = Field(gt=0)


class PumpQuadratic(_Frozen):
    """Pump power curve P = c1*W^2 + c2*W + c3 (kW, flow in m3/h)"""

    c1: float = Field(default=0.0, ge=0)
    c2: float = 0.0
    c3: float = 0.0

    def power(self, flow: float) -> float:
        return self.c1 * flow * flow + self.c2 * flow + self.c3


class GeneratorSpec(_Frozen):
    name: str
    no_load_cost: float = Field(ge=0)       # $/h
    marginal_cost: float = Field(ge=0)      # $/kWh
    p_min: float = Field(ge=0)              # kW
    p_max: float = Field(ge=0)              # kW


class EnergyStorageSpec(_Frozen):
    name: str
    rated_power: float = Field(ge=0)        # kW
    eff_charge: float = Field(gt=0, le=1)
    eff_discharge: float = Field(gt=0, le=1)
    level_min: float = Field(ge=0)          # kWh
    level_max: float = Field(ge=0)          # kWh
    level_initial: float = Field(ge=0)      # kWh
    # free-text provenance for the capacity unit
    capacity_note: Optional[str] = None


class GridTieSpec(_Frozen):
    tie_limit: float = Field(ge=0)          # kW, 0 means islanded
    import_price: Series                    # $/kWh
    export_price: Series                    # $/kWh

    @property
    def islanded(self) -> bool:
        return self.tie_limit == 0


class WastewaterSpec(_Frozen):
    flow_min: float = Field(ge=0)           # m3/h
    flow_max: float = Field(ge=0)           # m3/h
    reclaim_rate: Series                    # m3/h
    reservoir_cap: float = Field(ge=0)      # m3
    reservoir_initial: float = Field(ge=0)  # m3
    energy_intensity: float = Field(ge=0)   # kWh/m3
    pump: PumpQuadratic = PumpQuadratic()


class TreatmentUnitSpec(_Frozen):
    name: str
    flow_min: float = Field(ge=0)
    flow_max: float = Field(ge=0)
    energy_intensity: float = Field(ge=0)
    pump: PumpQuadratic = PumpQuadratic()


class StorageTankSpec(_Frozen):
    name: str
    inflow_min: float = Field(ge=0)
    inflow_max: float = Field(ge=0)
    outflow_max: float = Field(ge=0)
    level_min: float = Field(ge=0)          # m3
    level_max: float = Field(ge=0)          # m3
    level_initial: float = Field(ge=0)      # m3
    pump: PumpQuadratic = PumpQuadratic()


class Profiles(_Frozen):
    power_demand: Series                    # kW
    renewables: Series                      # kW
    water_demand: Series                    # m3/h


class ScenarioOptions(_Frozen):
    terminal_storage: bool = False
    tank_pump_driver: Literal["discharge", "charge_and_discharge"] = "discharge"
    pwl_segments: int = Field(default=3, ge=1)
    pwl_samples: int = Field(default=9, ge=2)


class Scenario(_Frozen):
    """One validated MWEN community"""

    name: str = "scenario"
    description: str = ""
    time: TimeGrid
    generators: Tuple[GeneratorSpec, ...] = ()
    storage: Tuple[EnergyStorageSpec, ...] = ()
    grid: GridTieSpec
    wastewater: Optional[WastewaterSpec] = None
    treatment: Tuple[TreatmentUnitSpec, ...] = ()
    tanks: Tuple[StorageTankSpec, ...] = ()
    profiles: Profiles
    options: ScenarioOptions = ScenarioOptions()
    warnings: Tuple[str, ...] = ()

    @property
    def horizon(self) -> int:
        return self.time.horizon_steps

    @property
    def dt(self) -> float:
        return self.time.step_hours

    @property
    def islanded(self) -> bool:
        return self.grid.islanded

    def to_record(self) -> Dict[str, Any]:
        """Serialize back to the scenario-file layout"""
        record: Dict[str, Any] = {
            "name": self.name,
            "description": self.description,
            "time": self.time.model_dump(),
            "generators": [g.model_dump() for g in self.generators],
            "storage": [_drop_none(s.model_dump()) for s in self.storage],
            "grid": {"tie_limit": self.grid.tie_limit},
            "wastewater": None,
            "treatment": [t.model_dump() for t in self.treatment],
            "tanks": [k.model_dump() for k in self.tanks],
            "profiles": {
                "power_demand": list(self.profiles.power_demand),
                "renewables": list(self.profiles.renewables),
                "water_demand": list(self.profiles.water_demand),
            },
            "prices": {
                "import": list(self.grid.import_price),
                "export": list(self.grid.export_price),
            },
            "options": self.options.model_dump(),
        }
        if self.wastewater is not None:
            ww = self.wastewater.model_dump()
            ww["reclaim_rate"] = list(self.wastewater.reclaim_rate)
            record["wastewater"] = ww
        return record

    def mem_view(self) -> "Scenario":
        """Copy holding only what the microgrid operator owns"""
        zeros = tuple(0.0 for _ in range(self.horizon))
        return self.model_copy(update={
            "wastewater": None,
            "treatment": (),
            "tanks": (),
            "profiles": self.profiles.model_copy(update={"water_demand": zeros}),
        })

    def mwm_view(self) -> "Scenario":
        """Copy holding only what the water operator owns: no prices, no generators"""
        zeros = tuple(0.0 for _ in range(self.horizon))
        return self.model_copy(update={
            "generators": (),
            "storage": (),
            "grid": GridTieSpec(tie_limit=0.0, import_price=zeros, export_price=zeros),
            "profiles": self.profiles.model_copy(update={"power_demand": zeros, "renewables": zeros}),
        })


def _drop_none(data: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in data.items() if v is not None}


def pump_ids(scenario: Scenario) -> List[str]:
    """Stable identifiers of every pump in the water system"""
    ids: List[str] = []
    if scenario.wastewater is not None:
        ids.append("wastewater")
    ids.extend(f"treatment:{unit.name}" for unit in scenario.treatment)
    ids.extend(f"tank:{tank.name}" for tank in scenario.tanks)
    return ids


def pump_of(scenario: Scenario, pump_id: str) -> PumpQuadratic:
    kind, _, name = pump_id.partition(":")
    if kind == "wastewater" and scenario.wastewater is not None:
        return scenario.wastewater.pump
    if kind == "treatment":
        return next(u.pump for u in scenario.treatment if u.name == name)
    if kind == "tank":
        return next(k.pump for k in scenario.tanks if k.name == name)
    raise KeyError(pump_id)


def pump_flow_range(scenario: Scenario, pump_id: str) -> Tuple[float, float]:
    """Domain of the flow that drives the pump"""
    kind, _, name = pump_id.partition(":")
    if kind == "wastewater" and scenario.wastewater is not None:
        return 0.0, scenario.wastewater.flow_max
    if kind == "treatment":
        unit = next(u for u in scenario.treatment if u.name == name)
        return 0.0, unit.flow_max
    if kind == "tank":
        tank = next(k for k in scenario.tanks if k.name == name)
        if scenario.options.tank_pump_driver == "charge_and_discharge":
            return 0.0, max(tank.inflow_max, tank.outflow_max)
        return 0.0, tank.outflow_max
    raise KeyError(pump_id)
