import logging
from typing import Dict, Optional

from mwen.core.config import PwlConfig, SolverConfig
from mwen.scenario.models import Scenario, pump_flow_range, pump_ids, pump_of
from .curve import PwlCurve, sample_quadratic
from .fitting import fit_max_affine

logger = logging.getLogger(__name__)


def fit_scenario_curves(
    scenario: Scenario,
    config: Optional[PwlConfig] = None,
    solver_config: Optional[SolverConfig] = None,
) -> Dict[str, PwlCurve]:
    """
    Fit one curve per pump over the flow range that drives it

    Segment and sample counts come from ``config`` when given, otherwise from
    the scenario options.
    """
    if config is None:
        config = PwlConfig(segments=scenario.options.pwl_segments, samples=scenario.options.pwl_samples)
    curves: Dict[str, PwlCurve] = {}
    for pump_id in pump_ids(scenario):
        pump = pump_of(scenario, pump_id)
        lo, hi = pump_flow_range(scenario, pump_id)
        if hi <= lo:
            curves[pump_id] = PwlCurve(segments=((0.0, pump.power(lo)),), domain=(lo, hi))
            continue
        data = sample_quadratic(pump, (lo, hi), config.samples)
        curves[pump_id] = fit_max_affine(data, config.segments, config.method, solver_config)
        logger.info(
            f"Pump '{pump_id}': {len(curves[pump_id].segments)} segments over [{lo}, {hi}], "
            f"SSE {curves[pump_id].sse:.3g}"
        )
    return curves
