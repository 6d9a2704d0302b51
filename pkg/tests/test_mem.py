"""
Tests for the microgrid energy management model
"""

import pytest

from mwen.core.errors import ExtractionError, ModelBuildError
from mwen.models import (
    CouplingWater,
    FixedWater,
    MemDispatch,
    balance_residuals,
    build_mem,
    extract_mem_solution,
    mem_cost,
    tags,
)
from mwen.solver import SolveStatus, solve_milp


def solve_fixed(scenario, water=None):
    model, var_map = build_mem(scenario, FixedWater(series=tuple(water or (0.0,) * scenario.horizon)))
    result = solve_milp(model)
    assert result.status == SolveStatus.OPTIMAL
    return result, extract_mem_solution(var_map, result.x)


class TestBuildMem:
    """Test MEM structure"""

    def test_binary_count(self, make_scenario, units):
        scenario = make_scenario(horizon=2, storage=[units.storage()])
        model, var_map = build_mem(scenario, FixedWater(series=(0.0, 0.0)))
        assert var_map.binary_count() == 10
        assert len(model.binary_ids()) == 10

    def test_islanded_tie_pinned(self, make_scenario):
        scenario = make_scenario(horizon=2, tie_limit=0.0)
        model, var_map = build_mem(scenario, FixedWater(series=(0.0, 0.0)))
        for var in var_map.grid_import + var_map.grid_export:
            assert (model.variables[var].lower, model.variables[var].upper) == (0.0, 0.0)

    def test_every_row_tagged(self, make_scenario, units):
        scenario = make_scenario(horizon=2, storage=[units.storage()])
        model, _ = build_mem(scenario, FixedWater(series=(0.0, 0.0)))
        assert all(c.tag for c in model.constraints)
        assert len(model.constraints_tagged(tags.POWER_BALANCE)) == 2
        assert set(model.tags().values()) <= set(tags.DESCRIPTIONS)

    def test_fixed_water_length_checked(self, make_scenario):
        scenario = make_scenario(horizon=2)
        with pytest.raises(ModelBuildError, match="horizon"):
            build_mem(scenario, FixedWater(series=(1.0,)))

    def test_coupling_water_variables(self, make_scenario):
        scenario = make_scenario(horizon=3)
        model, var_map = build_mem(scenario, CouplingWater(lower=0.0, upper=50.0))
        assert len(var_map.water) == 3
        assert model.variables[var_map.water[0]].name == "P_E_water[0]"
        assert model.variables[var_map.water[0]].upper == 50.0


class TestMemCost:
    """Test the operating cost of a dispatch"""

    def test_generator_cost(self, make_scenario):
        dispatch = MemDispatch(generator_power={"gas": (100.0,)}, generator_on={"gas": (1,)},
                               grid_import=(0.0,), grid_export=(0.0,))
        assert mem_cost(dispatch, make_scenario()).total == pytest.approx(10.0)

    def test_idle(self, make_scenario):
        dispatch = MemDispatch(generator_power={"gas": (0.0,)}, generator_on={"gas": (0,)},
                               grid_import=(0.0,), grid_export=(0.0,))
        assert mem_cost(dispatch, make_scenario()).total == 0.0

    def test_export_revenue(self, make_scenario):
        scenario = make_scenario(import_price=0.08, export_ratio=1.0)
        dispatch = MemDispatch(generator_power={"gas": (0.0,)}, generator_on={"gas": (0,)},
                               grid_import=(0.0,), grid_export=(50.0,))
        assert mem_cost(dispatch, scenario).total == pytest.approx(-4.0)

    def test_length_mismatch(self, make_scenario):
        dispatch = MemDispatch(generator_power={"gas": (0.0, 0.0)}, generator_on={"gas": (0, 0)},
                               grid_import=(0.0,), grid_export=(0.0,))
        with pytest.raises(ModelBuildError):
            mem_cost(dispatch, make_scenario())


class TestExtractMemSolution:
    """Test post-solve cross-checks"""

    @pytest.fixture
    def built(self, make_scenario, units):
        scenario = make_scenario(horizon=1, storage=[units.storage()])
        return build_mem(scenario, FixedWater(series=(0.0,)))

    def test_charge_raises_level(self, built):
        model, var_map = built
        x = [0.0] * model.num_variables
        x[var_map.es_charge["bess"][0]] = 100.0
        x[var_map.es_charging["bess"][0]] = 1.0
        x[var_map.es_level["bess"][0]] = 500.0 + 93.97
        dispatch = extract_mem_solution(var_map, x)
        assert dispatch.storage_level["bess"][0] == pytest.approx(593.97)

    def test_idle_keeps_initial_level(self, built):
        model, var_map = built
        x = [0.0] * model.num_variables
        x[var_map.es_level["bess"][0]] = 500.0
        assert extract_mem_solution(var_map, x).storage_level["bess"] == (500.0,)

    def test_level_mismatch(self, built):
        model, var_map = built
        x = [0.0] * model.num_variables
        with pytest.raises(ExtractionError) as exc:
            extract_mem_solution(var_map, x)
        assert exc.value.tag == tags.STORAGE_DYNAMICS

    def test_storage_exclusivity(self, built):
        model, var_map = built
        x = [0.0] * model.num_variables
        x[var_map.es_charging["bess"][0]] = 1.0
        x[var_map.es_discharging["bess"][0]] = 1.0
        x[var_map.es_level["bess"][0]] = 500.0
        with pytest.raises(ExtractionError) as exc:
            extract_mem_solution(var_map, x)
        assert exc.value.tag == tags.STORAGE_EXCLUSIVITY

    def test_tie_exclusivity(self, built):
        model, var_map = built
        x = [0.0] * model.num_variables
        x[var_map.es_level["bess"][0]] = 500.0
        x[var_map.importing[0]] = 1.0
        x[var_map.exporting[0]] = 1.0
        with pytest.raises(ExtractionError) as exc:
            extract_mem_solution(var_map, x)
        assert exc.value.tag == tags.TIE_EXCLUSIVITY
        assert tags.describe(tags.TIE_EXCLUSIVITY) in str(exc.value)


class TestSolvedMem:
    """Test solved MEM dispatches"""

    def test_generator_beats_import(self, make_scenario):
        # gas: 6 + 0.04 * 200 = 14 against 0.10 * 200 = 20 from the grid
        result, dispatch = solve_fixed(make_scenario())
        assert result.objective == pytest.approx(14.0)
        assert dispatch.generator_on["gas"] == (1,)
        assert dispatch.cost.total == pytest.approx(result.objective)

    def test_water_power_is_served(self, make_scenario, units):
        scenario = make_scenario(horizon=2, load=[180.0, 240.0], storage=[units.storage()])
        _, dispatch = solve_fixed(scenario, water=(10.0, 20.0))
        assert dispatch.water_power == (10.0, 20.0)
        assert max(abs(r) for r in balance_residuals(dispatch, scenario)) <= 1e-6

    def test_islanded_cheap_storage(self, make_scenario, units):
        scenario = make_scenario(horizon=2, load=100.0, tie_limit=0.0, generators=[],
                                 storage=[units.storage()])
        result, dispatch = solve_fixed(scenario)
        assert result.objective == pytest.approx(0.0)
        assert all(level >= 0.0 for level in dispatch.storage_level["bess"])

    def test_terminal_storage(self, make_scenario, units):
        kwargs = dict(horizon=2, load=100.0, storage=[units.storage()])
        free, _ = solve_fixed(make_scenario(**kwargs))
        bound, dispatch = solve_fixed(make_scenario(options={"terminal_storage": True}, **kwargs))
        assert dispatch.storage_level["bess"][-1] >= 500.0 - 1e-6
        assert bound.objective >= free.objective - 1e-9
