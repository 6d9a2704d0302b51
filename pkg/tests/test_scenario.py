"""
Tests for scenario validation, loading and the bundled catalog
"""

import json

import pytest

from mwen.core.errors import ReportIOError, ScenarioValidationError
from mwen.scenario import (
    ScenarioCatalog,
    ScenarioLoader,
    ScenarioValidator,
    derive_directional_efficiencies,
    net_load,
    pump_ids,
    save_scenario,
    validate_scenario,
)


class TestScenarioValidator:
    """Test ScenarioValidator rules"""

    @pytest.fixture
    def validator(self):
        return ScenarioValidator()

    def test_natural_gas_generator_accepted(self, make_record, validator):
        is_valid, errors = validator.validate(make_record())
        assert is_valid is True
        assert errors == []

        scenario = validator.build(make_record())
        gen = scenario.generators[0]
        assert gen.no_load_cost == 6.0
        assert (gen.p_min, gen.p_max) == (40.0, 400.0)

    def test_treatment_flow_bounds_inverted(self, make_record, units, validator):
        record = make_record(treatment=[units.treatment(flow_min=2.725, flow_max=0.681)])
        is_valid, errors = validator.validate(record)
        assert is_valid is False
        assert any("treatment[0].flow_min" in error for error in errors)

        with pytest.raises(ScenarioValidationError) as exc:
            validator.build(record)
        assert exc.value.exit_code == 2

    def test_unservable_warning(self, make_scenario):
        scenario = make_scenario(tie_limit=0.0, generators=[], load=50.0)
        assert scenario.islanded
        assert "unservable scenario" in scenario.warnings

    def test_unservable_warning_ignores_storage(self, make_scenario, units):
        scenario = make_scenario(tie_limit=0.0, generators=[], load=50.0, storage=[units.storage()])
        assert scenario.warnings == ("unservable scenario",)

    def test_no_warning_when_generation_exists(self, make_scenario):
        scenario = make_scenario(tie_limit=0.0, load=50.0)
        assert scenario.warnings == ()

    def test_collects_every_error(self, make_record, units, validator):
        record = make_record(horizon=2, load=[100.0], treatment=[units.treatment(flow_min=5.0, flow_max=1.0)])
        record["generators"][0]["p_min"] = 500.0
        is_valid, errors = validator.validate(record)
        assert is_valid is False
        assert len(errors) >= 3
        assert any("power_demand" in error for error in errors)
        assert any("generators[0].p_min" in error for error in errors)

    def test_unknown_key_rejected(self, make_record, validator):
        record = make_record()
        record["generators"][0]["ramp_rate"] = 10.0
        is_valid, errors = validator.validate(record)
        assert is_valid is False
        assert any("ramp_rate" in error for error in errors)

    def test_negative_series_rejected(self, make_record, validator):
        record = make_record(horizon=2, load=[100.0, -5.0])
        is_valid, errors = validator.validate(record)
        assert is_valid is False
        assert any("negative at steps [1]" in error for error in errors)

    def test_export_needs_series_or_ratio(self, make_record, validator):
        record = make_record()
        del record["prices"]["export_ratio"]
        is_valid, errors = validator.validate(record)
        assert is_valid is False
        assert any("export_ratio" in error for error in errors)

    def test_export_ratio_scales_import(self, make_scenario):
        scenario = make_scenario(horizon=2, import_price=[0.10, 0.20], export_ratio=0.5)
        assert scenario.grid.export_price == pytest.approx((0.05, 0.10))

    def test_default_initial_levels(self, make_scenario, units):
        storage = units.storage()
        del storage["level_initial"]
        tank = units.tank()
        del tank["level_initial"]
        scenario = make_scenario(storage=[storage], tanks=[tank])
        assert scenario.storage[0].level_initial == 500.0
        assert scenario.tanks[0].level_initial == 15.0

    def test_round_trip_efficiency_split(self, make_scenario, units):
        storage = units.storage()
        del storage["eff_charge"], storage["eff_discharge"]
        storage["round_trip_efficiency"] = 0.25
        scenario = make_scenario(storage=[storage])
        assert scenario.storage[0].eff_charge == pytest.approx(0.5)
        assert scenario.storage[0].eff_discharge == pytest.approx(0.5)

    def test_validation_is_idempotent(self, make_record, units):
        record = make_record(horizon=2, storage=[units.storage()], treatment=[units.treatment()],
                             tanks=[units.tank()], wastewater=units.wastewater(horizon=2))
        once = validate_scenario(record)
        twice = validate_scenario(once)
        assert twice == once
        assert validate_scenario(once.to_record()) == once


class TestScenarioHelpers:
    """Test the small derivations used by the model builders"""

    def test_lossless_efficiency(self):
        assert derive_directional_efficiencies(1.0) == (1.0, 1.0)

    def test_source_round_trip_efficiency(self):
        charge, discharge = derive_directional_efficiencies(0.883)
        assert charge == pytest.approx(0.93968, abs=1e-5)
        assert discharge == charge

    def test_perfect_square_efficiency(self):
        assert derive_directional_efficiencies(0.25) == (0.5, 0.5)

    @pytest.mark.parametrize("value", [0.0, 1.5, -0.1])
    def test_efficiency_out_of_range(self, value):
        with pytest.raises(ScenarioValidationError):
            derive_directional_efficiencies(value)

    @pytest.mark.parametrize("load,res,water,expected", [
        (100, 30, 20, 90),
        (0, 0, 0, 0),
        (50, 80, 10, -20),
    ])
    def test_net_load(self, load, res, water, expected):
        assert net_load(load, res, water) == expected

    def test_net_load_series(self):
        assert net_load([10, 100], [0, 30], [0, 20], t=1) == 90

    def test_pump_ids_order(self, make_scenario, units):
        scenario = make_scenario(wastewater=units.wastewater(), treatment=[units.treatment()],
                                 tanks=[units.tank()])
        assert pump_ids(scenario) == ["wastewater", "treatment:groundwater", "tank:stu"]

    def test_views_split_ownership(self, water_scenario):
        mem = water_scenario.mem_view()
        assert mem.treatment == () and mem.tanks == ()
        assert set(mem.profiles.water_demand) == {0.0}

        mwm = water_scenario.mwm_view()
        assert mwm.generators == () and mwm.storage == ()
        assert set(mwm.grid.import_price) == {0.0}
        assert mwm.profiles.water_demand == water_scenario.profiles.water_demand


class TestScenarioLoader:
    """Test loading bundled and on-disk scenarios"""

    def test_list_bundled(self, bundled_loader):
        assert bundled_loader.list_scenarios() == ["scenario_a", "scenario_b", "scenario_c"]

    @pytest.mark.parametrize("name", ["scenario_a", "scenario_b", "scenario_c"])
    def test_bundled_scenarios_validate(self, bundled_loader, name):
        scenario = bundled_loader.load(name)
        assert scenario.horizon == 24
        assert len(scenario.profiles.power_demand) == 24

    def test_scenario_c_is_islanded(self, bundled_loader):
        assert bundled_loader.load("scenario_c").islanded

    def test_save_and_reload(self, make_scenario, units, tmp_path):
        scenario = make_scenario(horizon=2, storage=[units.storage()], tanks=[units.tank()])
        path = save_scenario(scenario, tmp_path / "nested" / "tiny.json")
        assert ScenarioLoader(tmp_path / "nested").load("tiny") == scenario

    def test_missing_scenario(self, bundled_loader):
        with pytest.raises(ReportIOError) as exc:
            bundled_loader.load("no_such_scenario")
        assert exc.value.exit_code == 5

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ScenarioValidationError):
            ScenarioLoader(tmp_path).load(path)

    def test_invalid_record_on_disk(self, make_record, tmp_path):
        record = make_record()
        record["time"]["step_hours"] = 0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(record), encoding="utf-8")
        with pytest.raises(ScenarioValidationError) as exc:
            ScenarioLoader(tmp_path).load("bad")
        assert any("step_hours" in error for error in exc.value.errors)


class TestScenarioCatalog:
    """Test the bundled catalog"""

    def test_list_all(self):
        entries = ScenarioCatalog().list_all()
        assert [entry["id"] for entry in entries] == ["scenario_a", "scenario_b", "scenario_c"]
        assert all(entry["description"] for entry in entries)
