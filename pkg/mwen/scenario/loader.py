"""
Scenario Loader

Loads scenario JSON files from disk or from the bundled scenario directory
and runs them through validation.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Union

from mwen.core.errors import ReportIOError, ScenarioValidationError
from .models import Scenario
from .validation import validate_scenario

logger = logging.getLogger(__name__)

BUNDLED_DIR = Path(__file__).parent / "data"


class ScenarioLoader:
    """Loads scenarios from a directory of JSON files"""

    def __init__(self, scenarios_dir: Optional[Union[str, Path]] = None):
        self.scenarios_dir = Path(scenarios_dir) if scenarios_dir else BUNDLED_DIR
        if not self.scenarios_dir.exists():
            raise ReportIOError("Scenario directory not found", str(self.scenarios_dir))

    def load(self, name_or_path: Union[str, Path]) -> Scenario:
        """
        Load a scenario by bundled name, relative path, or filesystem path

        Raises:
            ReportIOError: file missing or unreadable
            ScenarioValidationError: malformed JSON or rule violations
        """
        path = self.resolve(name_or_path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                record = json.load(f)
        except json.JSONDecodeError as e:
            raise ScenarioValidationError([f"{path}: invalid JSON - {e}"])
        except OSError as e:
            raise ReportIOError(f"Cannot read scenario: {e}", str(path))

        scenario = validate_scenario(record)
        logger.info(f"Loaded scenario '{scenario.name}' from {path} (T={scenario.horizon}, islanded={scenario.islanded})")
        return scenario

    def resolve(self, name_or_path: Union[str, Path]) -> Path:
        candidate = Path(name_or_path)
        if candidate.exists():
            return candidate
        for option in (self.scenarios_dir / candidate, self.scenarios_dir / f"{name_or_path}.json"):
            if option.exists():
                return option
        raise ReportIOError("Scenario not found", str(name_or_path))

    def list_scenarios(self) -> List[str]:
        """Names of every scenario JSON in the directory, sorted"""
        return sorted(p.stem for p in self.scenarios_dir.glob("*.json"))


def load_scenario(name_or_path: Union[str, Path]) -> Scenario:
    return ScenarioLoader().load(name_or_path)


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    """Write a scenario back to the file layout it was parsed from"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(scenario.to_record(), f, indent=2)
    except OSError as e:
        raise ReportIOError(f"Cannot write scenario: {e}", str(path))
    return path
