"""
Shared fixtures: tiny hand-checkable scenarios and the bundled communities.
"""

import copy
from typing import Any, Callable, Dict, Optional, Sequence

import pytest

from mwen.core.config import PwlConfig
from mwen.pwl import fit_scenario_curves
from mwen.scenario import ScenarioLoader, validate_scenario

GAS = {"name": "gas", "no_load_cost": 6.0, "marginal_cost": 0.04, "p_min": 40.0, "p_max": 400.0}
ZERO_PUMP = {"c1": 0.0, "c2": 0.0, "c3": 0.0}


def _series(value: Any, horizon: int) -> list:
    if isinstance(value, (int, float)):
        return [float(value)] * horizon
    return [float(v) for v in value]


def build_record(
    horizon: int = 1,
    load: Any = 200.0,
    renewables: Any = 0.0,
    water_demand: Any = 0.0,
    import_price: Any = 0.10,
    export_ratio: float = 0.0,
    tie_limit: float = 1000.0,
    generators: Sequence[Dict[str, Any]] = (GAS,),
    storage: Sequence[Dict[str, Any]] = (),
    wastewater: Optional[Dict[str, Any]] = None,
    treatment: Sequence[Dict[str, Any]] = (),
    tanks: Sequence[Dict[str, Any]] = (),
    options: Optional[Dict[str, Any]] = None,
    name: str = "tiny",
) -> Dict[str, Any]:
    """Raw scenario record; scalars are broadcast over the horizon"""
    record = {
        "name": name,
        "description": "test fixture",
        "time": {"horizon_steps": horizon, "step_hours": 1.0},
        "generators": copy.deepcopy(list(generators)),
        "storage": copy.deepcopy(list(storage)),
        "grid": {"tie_limit": tie_limit},
        "wastewater": copy.deepcopy(wastewater),
        "treatment": copy.deepcopy(list(treatment)),
        "tanks": copy.deepcopy(list(tanks)),
        "profiles": {
            "power_demand": _series(load, horizon),
            "renewables": _series(renewables, horizon),
            "water_demand": _series(water_demand, horizon),
        },
        "prices": {"import": _series(import_price, horizon), "export_ratio": export_ratio},
    }
    if options:
        record["options"] = dict(options)
    return record


def treatment_unit(name: str = "groundwater", flow_min: float = 0.5, flow_max: float = 3.0,
                   intensity: float = 0.154, pump: Optional[Dict[str, float]] = None) -> Dict[str, Any]:
    return {"name": name, "flow_min": flow_min, "flow_max": flow_max, "energy_intensity": intensity,
            "pump": dict(pump or ZERO_PUMP)}


def storage_unit(name: str = "bess", eff: float = 0.9397, rated: float = 200.0,
                 level_max: float = 1000.0, level_initial: float = 500.0) -> Dict[str, Any]:
    return {"name": name, "rated_power": rated, "eff_charge": eff, "eff_discharge": eff,
            "level_min": 0.0, "level_max": level_max, "level_initial": level_initial}


def tank_unit(name: str = "stu", level_initial: float = 10.0, pump: Optional[Dict[str, float]] = None) -> Dict[str, Any]:
    return {"name": name, "inflow_min": 0.5, "inflow_max": 3.0, "outflow_max": 3.0,
            "level_min": 0.0, "level_max": 30.0, "level_initial": level_initial,
            "pump": dict(pump or ZERO_PUMP)}


def wastewater_unit(reclaim: Any = 0.0, horizon: int = 1, intensity: float = 52.0,
                    reservoir_initial: float = 5.0, pump: Optional[Dict[str, float]] = None) -> Dict[str, Any]:
    return {"flow_min": 0.5, "flow_max": 5.0, "reclaim_rate": _series(reclaim, horizon),
            "reservoir_cap": 40.0, "reservoir_initial": reservoir_initial,
            "energy_intensity": intensity, "pump": dict(pump or ZERO_PUMP)}


@pytest.fixture
def make_record() -> Callable[..., Dict[str, Any]]:
    return build_record


@pytest.fixture
def make_scenario() -> Callable:
    """Factory: keyword arguments of ``build_record`` -> validated Scenario"""
    def factory(**kwargs):
        return validate_scenario(build_record(**kwargs))
    return factory


@pytest.fixture
def units():
    """Unit record builders for composing fixtures inside tests"""
    class Units:
        treatment = staticmethod(treatment_unit)
        storage = staticmethod(storage_unit)
        tank = staticmethod(tank_unit)
        wastewater = staticmethod(wastewater_unit)
        gas = GAS
        zero_pump = ZERO_PUMP
    return Units


@pytest.fixture
def curves_for() -> Callable:
    """Fit pump curves with a small, fast configuration"""
    def factory(scenario, segments: int = 2, samples: int = 5):
        return fit_scenario_curves(scenario, PwlConfig(segments=segments, samples=samples))
    return factory


@pytest.fixture
def zero_scenario(make_scenario):
    """No load, no water demand, no water units"""
    return make_scenario(horizon=2, load=0.0)


@pytest.fixture
def water_scenario(make_scenario, units):
    """Two steps with one treatment unit whose pump has a real curve"""
    return make_scenario(
        horizon=2,
        load=[180.0, 240.0],
        water_demand=[1.0, 2.0],
        import_price=[0.05, 0.12],
        treatment=[units.treatment(pump={"c1": 1.2, "c2": 0.8, "c3": 0.0})],
    )


@pytest.fixture(scope="session")
def bundled_loader():
    return ScenarioLoader()


def truncate_record(record: Dict[str, Any], steps: int) -> Dict[str, Any]:
    """Keep the first ``steps`` entries of every per-step series"""
    horizon = record["time"]["horizon_steps"]

    def cut(value: Any) -> Any:
        if isinstance(value, dict):
            return {k: cut(v) for k, v in value.items()}
        if isinstance(value, list):
            if len(value) == horizon and all(isinstance(v, (int, float)) for v in value):
                return value[:steps]
            return [cut(v) for v in value]
        return value

    out = cut(copy.deepcopy(record))
    out["time"]["horizon_steps"] = steps
    return out


@pytest.fixture
def truncated(bundled_loader) -> Callable:
    """Factory: bundled scenario cut to its first steps"""
    def factory(name: str, steps: int = 2):
        return validate_scenario(truncate_record(bundled_loader.load(name).to_record(), steps))
    return factory
