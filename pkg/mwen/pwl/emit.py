"""Exact-equality encoding of a max-affine curve inside a ModelIR."""

import logging
from typing import List

from mwen.core.errors import ModelBuildError
from mwen.model_ir import ModelIR, Sense
from .curve import PwlCurve

logger = logging.getLogger(__name__)

DOMAIN_TOL = 1e-9


def emit_pwl_equality(model: ModelIR, curve: PwlCurve, flow_id: int, power_id: int, tag: str = "pwl") -> List[int]:
    """
    Force ``power == eval_pwl(curve, flow)`` with the incremental formulation

    flow = lo + sum(d_s), power = f(lo) + sum(a_s * d_s), 0 <= d_s <= len_s.
    Adjacency binary y_s says segment s is full: d_{s+1} <= len_{s+1} * y_s and
    d_s >= len_s * y_s. A single-segment curve needs no binaries.

    Returns:
        Ids of the constraints added

    Raises:
        ModelBuildError: flow bounds outside the curve domain
    """
    lo, hi = curve.domain
    flow = model.variables[flow_id]
    scale = DOMAIN_TOL * max(1.0, abs(lo), abs(hi))
    if flow.lower < lo - scale or flow.upper > hi + scale:
        raise ModelBuildError(
            f"Flow variable '{flow.name}' bounds [{flow.lower}, {flow.upper}] exceed curve domain [{lo}, {hi}]"
        )

    knots = curve.knots()
    lengths = [knots[s + 1] - knots[s] for s in range(len(curve.segments))]
    power_name = model.variables[power_id].name
    deltas = [model.add_variable(name=f"{power_name}.d{s}", lower=0.0, upper=length) for s, length in enumerate(lengths)]

    ids = [
        model.add_linear_constraint([(flow_id, 1.0)] + [(d, -1.0) for d in deltas], Sense.EQ, lo, tag=tag),
        model.add_linear_constraint(
            [(power_id, 1.0)] + [(d, -a) for d, (a, _) in zip(deltas, curve.segments)],
            Sense.EQ,
            curve.value(lo),
            tag=tag,
        ),
    ]
    for s in range(len(deltas) - 1):
        full = model.add_variable(name=f"{power_name}.y{s}", binary=True)
        ids.append(model.add_linear_constraint([(deltas[s + 1], 1.0), (full, -lengths[s + 1])], Sense.LE, 0.0, tag=tag))
        ids.append(model.add_linear_constraint([(deltas[s], 1.0), (full, -lengths[s])], Sense.GE, 0.0, tag=tag))
    return ids
