"""
Tests for the micro water management model
"""

import pytest

from mwen.admm import min_energy_dispatch
from mwen.core.errors import ExtractionError, InfeasibleError, ModelBuildError
from mwen.models import (
    MinEnergy,
    WaterDispatch,
    build_mwm,
    extract_mwm_solution,
    tags,
    water_balance_residuals,
    water_power,
    water_power_bounds,
)


class TestBuildMwm:
    """Test MWM structure"""

    def test_status_binaries(self, make_scenario, units, curves_for):
        scenario = make_scenario(horizon=2, wastewater=units.wastewater(horizon=2),
                                 treatment=[units.treatment()], tanks=[units.tank()])
        _, var_map = build_mwm(scenario, curves_for(scenario))
        assert var_map.status_binaries() == 8

    def test_missing_curve(self, water_scenario):
        with pytest.raises(ModelBuildError, match="No fitted curve"):
            build_mwm(water_scenario, {})

    def test_demand_without_sources(self, make_scenario):
        scenario = make_scenario(water_demand=1.0)
        with pytest.raises(ModelBuildError, match="no water sources"):
            build_mwm(scenario, {})

    def test_power_bounds(self, make_scenario, units, curves_for):
        scenario = make_scenario(wastewater=units.wastewater())
        assert water_power_bounds(scenario, curves_for(scenario)) == pytest.approx((0.0, 260.0))

    def test_charge_and_discharge_driver(self, make_scenario, units, curves_for):
        scenario = make_scenario(tanks=[units.tank()], options={"tank_pump_driver": "charge_and_discharge"})
        model, var_map = build_mwm(scenario, curves_for(scenario))
        driver = var_map.pump_flow["tank:stu"][0]
        assert model.variables[driver].name == "W_drv[stu,0]"

    def test_every_row_described(self, make_scenario, units, curves_for):
        scenario = make_scenario(
            horizon=2, wastewater=units.wastewater(horizon=2), treatment=[units.treatment()], tanks=[units.tank()], water_demand=1.0
        )
        model, _ = build_mwm(scenario, curves_for(scenario))
        assert all(c.tag for c in model.constraints)
        assert set(model.tags().values()) <= set(tags.DESCRIPTIONS)


class TestWaterPower:
    """Test power recomputed from flows"""

    def test_wastewater_intensity(self, make_scenario, units, curves_for):
        scenario = make_scenario(wastewater=units.wastewater())
        dispatch = WaterDispatch(wastewater_flow=(2.0,))
        assert water_power(dispatch, scenario, curves_for(scenario)) == pytest.approx([104.0])

    def test_treatment_intensity(self, make_scenario, units, curves_for):
        scenario = make_scenario(treatment=[units.treatment()])
        dispatch = WaterDispatch(treatment_flow={"groundwater": (2.0,)})
        assert water_power(dispatch, scenario, curves_for(scenario)) == pytest.approx([0.308])

    def test_flow_outside_pump_domain(self, make_scenario, units, curves_for):
        scenario = make_scenario(treatment=[units.treatment()])
        dispatch = WaterDispatch(treatment_flow={"groundwater": (9.0,)})
        with pytest.raises(ModelBuildError, match="outside domain"):
            water_power(dispatch, scenario, curves_for(scenario))


class TestExtractMwmSolution:
    """Test post-solve cross-checks on hand-made assignments"""

    def test_tank_fills(self, make_scenario, units, curves_for):
        scenario = make_scenario(tanks=[units.tank()])
        model, var_map = build_mwm(scenario, curves_for(scenario))
        x = [0.0] * model.num_variables
        x[var_map.st_charge["stu"][0]] = 1.0
        x[var_map.st_charging["stu"][0]] = 1.0
        x[var_map.st_level["stu"][0]] = 11.0
        assert extract_mwm_solution(var_map, x).tank_level["stu"] == (11.0,)

    def test_reservoir_reclaims(self, make_scenario, units, curves_for):
        scenario = make_scenario(wastewater=units.wastewater(reclaim=2.0))
        model, var_map = build_mwm(scenario, curves_for(scenario))
        x = [0.0] * model.num_variables
        x[var_map.ww_flow[0]] = 0.5
        x[var_map.ww_on[0]] = 1.0
        x[var_map.ww_level[0]] = 6.5
        assert extract_mwm_solution(var_map, x).reservoir_level == pytest.approx((6.5,))

    def test_tank_exclusivity(self, make_scenario, units, curves_for):
        scenario = make_scenario(tanks=[units.tank()])
        model, var_map = build_mwm(scenario, curves_for(scenario))
        x = [0.0] * model.num_variables
        x[var_map.st_charging["stu"][0]] = 1.0
        x[var_map.st_discharging["stu"][0]] = 1.0
        x[var_map.st_level["stu"][0]] = 10.0
        with pytest.raises(ExtractionError) as exc:
            extract_mwm_solution(var_map, x)
        assert exc.value.tag == tags.TANK_EXCLUSIVITY

    def test_pump_off_curve(self, water_scenario, curves_for):
        model, var_map = build_mwm(water_scenario, curves_for(water_scenario))
        x = [0.0] * model.num_variables
        x[var_map.pump_power["treatment:groundwater"][0]] = 50.0
        with pytest.raises(ExtractionError) as exc:
            extract_mwm_solution(var_map, x)
        assert exc.value.tag == tags.PUMP_CURVE
        assert str(exc.value).startswith(f"{tags.PUMP_CURVE}: ")
        assert tags.describe(tags.PUMP_CURVE) in str(exc.value)


class TestMinEnergyDispatch:
    """Test the water operator's own optimum"""

    def test_zero_demand_zero_energy(self, make_scenario, units, curves_for):
        scenario = make_scenario(horizon=2, treatment=[units.treatment()])
        dispatch = min_energy_dispatch(scenario, curves_for(scenario))
        assert dispatch.energy_kwh == pytest.approx(0.0, abs=1e-9)
        assert dispatch.treatment_on["groundwater"] == (0, 0)

    def test_demand_met(self, water_scenario, curves_for):
        curves = curves_for(water_scenario)
        dispatch = min_energy_dispatch(water_scenario, curves)
        assert max(abs(r) for r in water_balance_residuals(dispatch, water_scenario)) <= 1e-6
        assert list(dispatch.power) == pytest.approx(water_power(dispatch, water_scenario, curves), abs=1e-6)

    def test_demand_beyond_capacity(self, make_scenario, units, curves_for):
        scenario = make_scenario(water_demand=10.0, treatment=[units.treatment()])
        with pytest.raises(InfeasibleError) as exc:
            min_energy_dispatch(scenario, curves_for(scenario))
        assert exc.value.exit_code == 3

    def test_weighted_objective(self, water_scenario, curves_for):
        curves = curves_for(water_scenario)
        model, var_map = build_mwm(water_scenario, curves, objective=MinEnergy(weight=2.0))
        assert {model.objective[v] for v in var_map.water_power} == {2.0}
