"""
Augmented-Lagrangian terms on the coupling power series.

Each agent adds ``sign * lambda_t * x_t`` plus a linearized
``rho/2 * (x_t - target_t)^2`` to its own objective. The MEM side uses
sign +1, the MWM side sign -1.
"""

import logging
import math
from typing import List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mwen.core.errors import ModelBuildError
from mwen.model_ir import ModelIR, add_quadratic_penalty_epigraph, add_tangent_cut
from . import tags

logger = logging.getLogger(__name__)


class AugmentedTerms(BaseModel):
    """Multiplier and penalty data for one subproblem solve"""

    model_config = ConfigDict(frozen=True)

    multipliers: Tuple[float, ...]
    target: Tuple[float, ...]
    rho: float = Field(ge=0)
    sign: int = 1
    # physical range of the coupling variable, used to size the cut window
    bounds: Tuple[float, float] = (0.0, 1.0)
    cut_count: int = Field(default=17, ge=1)
    cut_spacing: str = "geometric"
    # cuts cover target +/- cut_width * (bounds range)
    cut_width: float = Field(default=0.5, gt=0)
    # extra tangency points per step (e.g. the agent's previous own iterate)
    extra_points: Tuple[Tuple[float, ...], ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "AugmentedTerms":
        if len(self.multipliers) != len(self.target):
            raise ValueError(f"{len(self.multipliers)} multipliers but {len(self.target)} targets")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if self.extra_points and len(self.extra_points) != len(self.target):
            raise ValueError("extra_points must have one entry per step")
        return self

    @property
    def weight(self) -> float:
        return self.rho / 2.0

    def window(self, t: int) -> Tuple[float, float]:
        span = self.bounds[1] - self.bounds[0]
        half = self.cut_width * (span if span > 0 else 1.0)
        return self.target[t] - half, self.target[t] + half


def add_augmented_terms(model: ModelIR, var_ids: Sequence[int], terms: AugmentedTerms) -> List[int]:
    """
    Add multiplier terms and penalty epigraphs for every step

    Returns:
        Epigraph variable id per step
    """
    if len(var_ids) != len(terms.target):
        raise ModelBuildError(f"{len(var_ids)} coupling variables but {len(terms.target)} targets")
    epigraphs: List[int] = []
    for t, var_id in enumerate(var_ids):
        if terms.multipliers[t]:
            model.add_objective_term(var_id, terms.sign * terms.multipliers[t])
        q = add_quadratic_penalty_epigraph(
            model,
            var_id,
            terms.target[t],
            terms.weight,
            terms.window(t),
            cut_count=terms.cut_count,
            spacing=terms.cut_spacing,
            tag=tags.PENALTY,
        )
        if terms.weight > 0 and terms.extra_points:
            for point in terms.extra_points[t]:
                add_tangent_cut(model, q, var_id, terms.target[t], terms.weight, point, tag=tags.PENALTY)
        epigraphs.append(q)
    return epigraphs


def penalty_gaps(terms: AugmentedTerms, values: Sequence[float], epigraph_values: Sequence[float]) -> List[float]:
    """True penalty minus its linearized value at each step (never negative up to rounding)"""
    return [terms.weight * (x - c) ** 2 - q for x, c, q in zip(values, terms.target, epigraph_values)]


def refine_penalty_cuts(
    model: ModelIR,
    var_ids: Sequence[int],
    epigraphs: Sequence[int],
    terms: AugmentedTerms,
    values: Sequence[float],
    epigraph_values: Sequence[float],
    tolerance: float,
) -> int:
    """Add a tangent at the solved point wherever the linearization is loose; returns cuts added"""
    added = 0
    for t, gap in enumerate(penalty_gaps(terms, values, epigraph_values)):
        if gap > tolerance:
            add_tangent_cut(model, epigraphs[t], var_ids[t], terms.target[t], terms.weight, values[t], tag=tags.PENALTY)
            added += 1
    return added


def augmented_value(terms: AugmentedTerms, values: Sequence[float]) -> float:
    """sum(sign * lambda_t * x_t) + rho/2 * ||x - target||^2 with the exact quadratic"""
    linear = math.fsum(terms.sign * lam * x for lam, x in zip(terms.multipliers, values))
    return linear + terms.weight * math.fsum((x - c) ** 2 for x, c in zip(values, terms.target))
