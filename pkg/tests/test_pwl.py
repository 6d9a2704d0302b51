"""
Tests for pump curve sampling, max-affine fitting and the PWL encoding
"""

import numpy as np
import pytest

from mwen.core.config import PwlConfig
from mwen.core.errors import ModelBuildError, ReportIOError
from mwen.model_ir import ModelIR, Sense
from mwen.pwl import (
    FitDataset,
    PwlCurve,
    curve_sse,
    emit_pwl_equality,
    eval_pwl,
    fit_max_affine,
    fit_pwl,
    fit_scenario_curves,
    normalize_segments,
    sample_quadratic,
)
from mwen.scenario import PumpQuadratic
from mwen.solver import solve_milp


def best_contiguous_two_piece_sse(data: FitDataset) -> float:
    """Exhaustive oracle: every contiguous 2-partition, least squares per part, convex only"""
    flows, powers = data.arrays()
    best = float(np.sum((np.polyval(np.polyfit(flows, powers, 1), flows) - powers) ** 2))
    for split in range(2, len(flows) - 1):
        left = np.polyfit(flows[:split], powers[:split], 1)
        right = np.polyfit(flows[split:], powers[split:], 1)
        if right[0] < left[0]:
            continue
        fitted = np.maximum(np.polyval(left, flows), np.polyval(right, flows))
        best = min(best, float(np.sum((fitted - powers) ** 2)))
    return best


def random_convex_data(rng: np.random.Generator) -> FitDataset:
    m = int(rng.integers(4, 13))
    flows = np.sort(rng.choice(np.arange(0, 40), size=m, replace=False)) / 4.0
    pump = PumpQuadratic(c1=float(rng.uniform(0.1, 2)), c2=float(rng.uniform(0, 1)), c3=float(rng.uniform(0, 1)))
    noise = rng.normal(0, 0.05, m)
    return FitDataset(flows=tuple(flows), powers=tuple(pump.power(w) + e for w, e in zip(flows, noise)))


class TestSampling:
    """Test quadratic sampling"""

    def test_constant_pump(self):
        data = sample_quadratic(PumpQuadratic(c3=3.0), (0.0, 1.0), 2)
        assert data.flows == (0.0, 1.0)
        assert data.powers == (3.0, 3.0)

    def test_square(self):
        data = sample_quadratic(PumpQuadratic(c1=1.0), (0.0, 2.0), 3)
        assert data.flows == (0.0, 1.0, 2.0)
        assert data.powers == (0.0, 1.0, 4.0)

    def test_single_sample_rejected(self):
        with pytest.raises(ModelBuildError):
            sample_quadratic(PumpQuadratic(c1=1.0), (0.0, 2.0), 1)

    def test_dataset_needs_distinct_flows(self):
        with pytest.raises(ValueError):
            FitDataset(flows=(1.0, 1.0), powers=(0.0, 1.0))

    def test_from_csv(self, tmp_path):
        path = tmp_path / "pump.csv"
        path.write_text("flow,power\n2,4\n0,0\n1,1\n", encoding="utf-8")
        data = FitDataset.from_csv(path)
        assert data.flows == (0.0, 1.0, 2.0)
        assert data.powers == (0.0, 1.0, 4.0)

    def test_from_missing_csv(self, tmp_path):
        with pytest.raises(ReportIOError):
            FitDataset.from_csv(tmp_path / "missing.csv")


class TestFitting:
    """Test max-affine fitting"""

    @pytest.fixture
    def three_points(self):
        return FitDataset.from_points([(0, 0), (1, 1), (2, 4)])

    def test_affine_data_gives_one_segment(self):
        data = FitDataset.from_points([(w, 2 * w + 1) for w in (0.0, 0.5, 1.0, 1.5)])
        curve = fit_max_affine(data, 1)
        assert curve.sse == pytest.approx(0.0, abs=1e-12)
        assert len(curve.segments) == 1
        assert curve.segments[0] == pytest.approx((2.0, 1.0))

    def test_affine_data_with_spare_segment(self):
        data = FitDataset.from_points([(w, 2 * w + 1) for w in (0.0, 0.5, 1.0, 1.5)])
        curve = fit_max_affine(data, 2, method="exact_milp")
        assert curve.sse == pytest.approx(0.0, abs=1e-9)
        assert curve.value(0.75) == pytest.approx(2.5, abs=1e-6)

    def test_three_point_interpolation(self, three_points):
        curve = fit_max_affine(three_points, 2, method="exact_milp")
        assert curve.sse == pytest.approx(0.0, abs=1e-9)
        assert len(curve.segments) == 2
        for flow, power in ((0, 0), (1, 1), (2, 4)):
            assert curve.value(flow) == pytest.approx(power, abs=1e-6)

    def test_square_matches_partition_oracle(self):
        data = FitDataset.from_points([(w, w * w) for w in (0.0, 0.5, 1.0, 1.5, 2.0)])
        curve = fit_max_affine(data, 2, method="exact_milp")
        assert curve.sse <= best_contiguous_two_piece_sse(data) + 1e-6

    def test_slopes_strictly_increase(self):
        data = sample_quadratic(PumpQuadratic(c1=0.9, c2=0.6), (0.0, 2.725), 9)
        curve = fit_max_affine(data, 3)
        assert all(a < b for a, b in zip(curve.slopes, curve.slopes[1:]))
        assert list(curve.knots()) == sorted(curve.knots())

    def test_more_segments_never_worse(self):
        data = sample_quadratic(PumpQuadratic(c1=1.2, c2=0.8), (0.0, 3.0), 9)
        sse = [fit_max_affine(data, v, method="exact_milp").sse for v in (1, 2, 3)]
        assert sse[1] <= sse[0] + 1e-9
        assert sse[2] <= sse[1] + 1e-9

    def test_zero_segments_rejected(self, three_points):
        with pytest.raises(ModelBuildError):
            fit_max_affine(three_points, 0)

    def test_exact_method_size_limit(self):
        data = sample_quadratic(PumpQuadratic(c1=1.0), (0.0, 1.0), 40)
        with pytest.raises(ModelBuildError, match="partition_heuristic"):
            fit_max_affine(data, 2, method="exact_milp")

    def test_fit_pwl_uses_config(self, three_points):
        curve = fit_pwl(three_points, PwlConfig(segments=1))
        assert len(curve.segments) == 1

    @pytest.mark.slow
    def test_exact_never_worse_than_heuristic(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            data = random_convex_data(rng)
            segments = int(rng.integers(2, 4))
            exact = fit_max_affine(data, segments, method="exact_milp")
            heuristic = fit_max_affine(data, segments, method="partition_heuristic")
            assert exact.sse <= heuristic.sse + 1e-6
            three = fit_max_affine(data, 3, method="exact_milp")
            two = fit_max_affine(data, 2, method="exact_milp")
            assert three.sse <= two.sse + 1e-6


class TestCurve:
    """Test curve evaluation and normalization"""

    @pytest.fixture
    def curve(self):
        return normalize_segments([(1.0, 0.0), (3.0, -2.0)], (0.0, 2.0))

    def test_active_segment(self, curve):
        assert eval_pwl(curve, 2.0) == 4.0

    def test_breakpoint_continuity(self, curve):
        assert eval_pwl(curve, 1.0) == 1.0

    def test_constant_curve(self):
        curve = PwlCurve(segments=((0.0, 3.0),), domain=(0.0, 10.0))
        assert eval_pwl(curve, 7.5) == 3.0

    def test_outside_domain_clamps(self, curve):
        assert eval_pwl(curve, 5.0) == 4.0

    def test_dominated_piece_dropped(self):
        curve = normalize_segments([(1.0, 0.0), (2.0, -10.0), (3.0, -2.0)], (0.0, 2.0))
        assert curve.segments == ((1.0, 0.0), (3.0, -2.0))

    def test_json_round_trip(self, curve):
        assert PwlCurve.from_json(curve.to_json()) == curve

    def test_sse(self, curve):
        data = FitDataset.from_points([(0, 0), (1, 2), (2, 4)])
        assert curve_sse(curve.segments, data) == pytest.approx(1.0)


class TestPwlEquality:
    """Test the exact PWL encoding inside a model"""

    @pytest.fixture
    def curve(self):
        return normalize_segments([(1.0, 0.0), (3.0, -2.0)], (0.0, 2.0))

    def _power_at(self, curve, flow):
        model = ModelIR("pwl")
        w = model.add_variable(name="W", lower=flow, upper=flow)
        p = model.add_variable(name="P", lower=-100.0, upper=100.0)
        emit_pwl_equality(model, curve, w, p)
        result = solve_milp(model)
        return result.x[p], model

    def test_mid_segment(self, curve):
        power, _ = self._power_at(curve, 1.5)
        assert power == pytest.approx(2.5)

    def test_at_breakpoint(self, curve):
        power, _ = self._power_at(curve, 1.0)
        assert power == pytest.approx(1.0)

    def test_power_cannot_undercut_curve(self, curve):
        model = ModelIR("pwl")
        w = model.add_variable(name="W", lower=0.0, upper=2.0)
        p = model.add_variable(name="P", lower=-100.0, upper=100.0)
        emit_pwl_equality(model, curve, w, p)
        model.add_linear_constraint([(w, 1.0)], Sense.EQ, 0.5)
        model.add_objective_term(p, 1.0)
        assert solve_milp(model).objective == pytest.approx(0.5)

    def test_single_segment_no_binaries(self):
        curve = PwlCurve(segments=((2.0, 1.0),), domain=(0.0, 4.0))
        power, model = self._power_at(curve, 3.0)
        assert power == pytest.approx(7.0)
        assert model.binary_ids() == []

    def test_flow_outside_domain(self, curve):
        model = ModelIR("pwl")
        w = model.add_variable(name="W", lower=0.0, upper=5.0)
        p = model.add_variable(name="P")
        with pytest.raises(ModelBuildError, match="exceed curve domain"):
            emit_pwl_equality(model, curve, w, p)


class TestScenarioCurves:
    """Test per-pump fitting for a scenario"""

    def test_one_curve_per_pump(self, make_scenario, units):
        scenario = make_scenario(
            wastewater=units.wastewater(pump={"c1": 0.9, "c2": 0.6, "c3": 0.0}),
            treatment=[units.treatment(pump={"c1": 1.2, "c2": 0.8, "c3": 0.0})],
            tanks=[units.tank()],
        )
        curves = fit_scenario_curves(scenario, PwlConfig(segments=2, samples=5))
        assert sorted(curves) == ["tank:stu", "treatment:groundwater", "wastewater"]
        assert curves["wastewater"].domain == (0.0, 5.0)
        assert curves["tank:stu"].domain == (0.0, 3.0)
        assert curves["tank:stu"].value(1.5) == pytest.approx(0.0, abs=1e-9)

    def test_fit_is_deterministic(self, water_scenario, curves_for):
        assert curves_for(water_scenario) == curves_for(water_scenario)
