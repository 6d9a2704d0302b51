from typing import Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

MODE_ALIASES = {"ob": "objective_based", "std": "standard"}


class AdmmConfig(BaseModel):
    """Settings for one decentralized run"""

    rho: float = Field(default=0.01, gt=0)
    eps_threshold: float = Field(default=1e-6, gt=0)
    ob_beta: float = Field(default=1e-4, gt=0)
    ob_window: int = Field(default=50, ge=2)
    max_iters: int = Field(default=300, ge=1)
    mode: Literal["standard", "objective_based"] = "objective_based"
    order: Literal["mem_first", "mwm_first"] = "mem_first"

    # penalty linearization
    cut_count: int = Field(default=17, ge=1)
    cut_spacing: Literal["uniform", "geometric"] = "geometric"
    cut_width: float = Field(default=0.5, gt=0)
    cut_tolerance: float = Field(default=1e-9, gt=0)
    cut_refine_rounds: int = Field(default=3, ge=0)

    # tie-break weight on the water operator's own energy
    mwm_energy_weight: float = Field(default=0.0, ge=0)
    # physical range of the coupling power; shared by both agents
    coupling_bounds: Optional[Tuple[float, float]] = None
    # seconds to wait for each agent message
    timeout: float = Field(default=60.0, gt=0)

    model_config = {"frozen": True}

    @model_validator(mode="before")
    @classmethod
    def _aliases(cls, data):
        if isinstance(data, dict) and data.get("mode") in MODE_ALIASES:
            data = {**data, "mode": MODE_ALIASES[data["mode"]]}
        return data

    @model_validator(mode="after")
    def _check_bounds(self) -> "AdmmConfig":
        if self.coupling_bounds is not None and self.coupling_bounds[0] > self.coupling_bounds[1]:
            raise ValueError(f"coupling_bounds {self.coupling_bounds} are inverted")
        return self
