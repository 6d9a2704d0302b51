"""
Sweep configuration files for ``mwen compare --config``.

Single sweep::

    scenario: scenario_a
    rhos: [0.01, 0.1, 1.0]
    modes: [standard, objective_based]
    ob_windows: [10, 50, 100]
    out: results/a

Batch::

    shared:
      out_base: results
      beta: 0.0001
    runs:
      - scenario: scenario_a
        out: ${out_base}/a
        admm: {ob_beta: "${beta}"}
      - scenario: scenario_c
        rhos: [1.0]

Keys missing from a run are taken from ``shared``; ``${name}`` inside string
values is replaced with the shared value of that name.
"""

import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, Field, ValidationError

from mwen.admm import AdmmConfig
from mwen.core.errors import ReportIOError, ScenarioValidationError

logger = logging.getLogger(__name__)

VARIABLE = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


class SweepConfig(BaseModel):
    """One comparison sweep over a scenario"""

    scenario: str
    rhos: List[float] = Field(default_factory=lambda: [0.01, 0.1, 1.0], min_length=1)
    modes: List[str] = Field(default_factory=lambda: ["standard", "objective_based"], min_length=1)
    ob_windows: Optional[List[int]] = None
    # AdmmConfig fields applied to every run of the sweep
    admm: Dict[str, Any] = {}
    out: Optional[str] = None
    gnuplot: bool = False

    def admm_config(self, base: Optional[AdmmConfig] = None) -> AdmmConfig:
        base = base or AdmmConfig()
        return AdmmConfig.model_validate({**base.model_dump(), **self.admm})


def resolve_variables(value: Any, shared: Dict[str, Any]) -> Any:
    """
    Substitute ``${name}`` references from ``shared``

    A string that is exactly one reference takes the shared value with its
    type; references inside longer strings are replaced textually. Unknown
    names are left alone.
    """
    if isinstance(value, dict):
        return {key: resolve_variables(item, shared) for key, item in value.items()}
    if isinstance(value, list):
        return [resolve_variables(item, shared) for item in value]
    if not isinstance(value, str) or "${" not in value:
        return value
    whole = VARIABLE.fullmatch(value)
    if whole and whole.group(1) in shared:
        return shared[whole.group(1)]
    return VARIABLE.sub(lambda m: str(shared[m.group(1)]) if m.group(1) in shared else m.group(0), value)


def parse_sweeps(config: Dict[str, Any]) -> List[SweepConfig]:
    """Turn a loaded YAML mapping into sweeps (single or ``runs:`` batch)"""
    if not isinstance(config, dict) or not config:
        raise ScenarioValidationError(["sweep config: expected a non-empty mapping"])

    if "runs" in config:
        shared = config.get("shared") or {}
        entries = config["runs"] or []
        if not entries:
            raise ScenarioValidationError(["sweep config: 'runs' is empty"])
    elif "scenario" in config:
        shared, entries = {}, [config]
    else:
        raise ScenarioValidationError(["sweep config: must contain 'scenario' or 'runs'"])

    fields = set(SweepConfig.model_fields)
    defaults = {key: value for key, value in shared.items() if key in fields}
    sweeps, errors = [], []
    for idx, entry in enumerate(entries, 1):
        if not isinstance(entry, dict):
            errors.append(f"runs[{idx}]: expected a mapping")
            continue
        merged = resolve_variables({**defaults, **entry}, shared)
        try:
            sweep = SweepConfig.model_validate(merged)
            sweep.admm_config()
        except ValidationError as e:
            for err in e.errors():
                errors.append(f"runs[{idx}].{'.'.join(str(p) for p in err['loc'])}: {err['msg']}")
            continue
        sweeps.append(sweep)
    if errors:
        raise ScenarioValidationError(errors)
    logger.info(f"Loaded {len(sweeps)} sweep(s)")
    return sweeps


def load_sweep(path: Union[str, Path]) -> List[SweepConfig]:
    """
    Read a sweep YAML file

    Raises:
        ReportIOError: file missing or not YAML
        ScenarioValidationError: file content is not a valid sweep
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f)
    except OSError as e:
        raise ReportIOError(f"Cannot read sweep config: {e}", str(path))
    except yaml.YAMLError as e:
        raise ReportIOError(f"Invalid YAML: {e}", str(path))
    return parse_sweeps(config)
