"""
Configuration models and environment overrides.

Environment variables are named ``MWEN_<SETTING>``; explicit values passed on
the command line win over the environment.
"""

import logging
import os
from typing import Any, Dict, Literal

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

ENV_PREFIX = "MWEN_"


class SolverConfig(BaseModel):
    """Tolerances and limits shared by every solver backend"""

    backend: str = "builtin"
    feasibility_tol: float = Field(default=1e-9, gt=0)
    integrality_tol: float = Field(default=1e-6, gt=0, lt=0.5)
    mip_gap: float = Field(default=1e-9, ge=0)
    node_limit: int = Field(default=200_000, ge=1)
    lp_iteration_limit: int = Field(default=100_000, ge=1)
    # pivots without objective progress before Bland's rule takes over
    bland_stall_threshold: int = Field(default=50, ge=1)
    # tableau is rebuilt from the basis every N pivots
    refactor_interval: int = Field(default=200, ge=1)

    model_config = {"frozen": True}


class PwlConfig(BaseModel):
    """How pump curves are sampled and fitted"""

    segments: int = Field(default=3, ge=1)
    samples: int = Field(default=9, ge=2)
    method: Literal["exact_milp", "partition_heuristic", "auto"] = "auto"

    model_config = {"frozen": True}


def _coerce(value: str, target: Any) -> Any:
    if isinstance(target, bool):
        return value.lower() in ("true", "1", "yes", "y")
    if isinstance(target, int):
        return int(value)
    if isinstance(target, float):
        return float(value)
    return value


def load_env_overrides(model: BaseModel, environ: Dict[str, str] = None) -> BaseModel:
    """
    Return a copy of ``model`` with fields overridden from ``MWEN_*`` variables

    Args:
        model: Config instance holding defaults
        environ: Mapping to read from (defaults to ``os.environ``)

    Returns:
        New config instance
    """
    environ = os.environ if environ is None else environ
    updates: Dict[str, Any] = {}
    for name in type(model).model_fields:
        env_var = f"{ENV_PREFIX}{name.upper()}"
        if env_var not in environ:
            continue
        try:
            updates[name] = _coerce(environ[env_var], getattr(model, name))
        except ValueError:
            logger.warning(f"Ignoring invalid value for {env_var}: {environ[env_var]}")
    if not updates:
        return model
    logger.debug(f"Environment overrides for {type(model).__name__}: {updates}")
    return type(model).model_validate({**model.model_dump(), **updates})


def log_level_from_env(default: str = "WARNING") -> int:
    name = os.environ.get(f"{ENV_PREFIX}LOG_LEVEL", default).upper()
    return getattr(logging, name, logging.WARNING)
