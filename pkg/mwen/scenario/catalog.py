"""
Scenario Catalog

Index of the bundled synthetic communities with browse/search support.
"""

import yaml
from pathlib import Path
from typing import Any, Dict, List, Optional

from mwen.core.errors import ReportIOError
from .loader import ScenarioLoader


class ScenarioCatalog:
    """Manages the bundled scenario catalog"""

    def __init__(self, loader: Optional[ScenarioLoader] = None):
        self.loader = loader or ScenarioLoader()
        self.catalog_path = Path(self.loader.scenarios_dir) / "catalog.yaml"
        self._catalog_data = None

    def load_catalog(self) -> Dict[str, Any]:
        """Load catalog.yaml, generating an index when the file is absent"""
        if self._catalog_data is not None:
            return self._catalog_data

        if not self.catalog_path.exists():
            self._catalog_data = self.generate_catalog()
            return self._catalog_data

        try:
            with open(self.catalog_path, 'r', encoding='utf-8') as f:
                self._catalog_data = yaml.safe_load(f)
            return self._catalog_data
        except (OSError, yaml.YAMLError) as e:
            raise ReportIOError(f"Failed to load catalog: {e}", str(self.catalog_path))

    def generate_catalog(self) -> Dict[str, Any]:
        """Build a catalog from the scenario files themselves"""
        catalog = {'version': '1.0.0', 'scenarios': {}}
        for name in self.loader.list_scenarios():
            scenario = self.loader.load(name)
            catalog['scenarios'][name] = {
                'path': f"{name}.json",
                'name': scenario.name,
                'description': scenario.description,
                'tags': ['islanded'] if scenario.islanded else ['grid-tied'],
                'synthetic': True,
            }
        return catalog

    def get_scenario_info(self, scenario_id: str) -> Optional[Dict]:
        return self.load_catalog().get('scenarios', {}).get(scenario_id)

    def search(self, query: Optional[str] = None, tags: Optional[List[str]] = None) -> List[Dict]:
        """
        Search scenarios in catalog

        Args:
            query: Case-insensitive match on name/description
            tags: Any-match tag filter

        Returns:
            List of matching scenario info dicts
        """
        results = []
        for scenario_id, info in self.load_catalog().get('scenarios', {}).items():
            if query:
                query_lower = query.lower()
                if (query_lower not in info.get('name', '').lower()
                        and query_lower not in info.get('description', '').lower()):
                    continue
            if tags and not set(info.get('tags', [])).intersection(tags):
                continue
            results.append({'id': scenario_id, **info})
        return results

    def list_all(self) -> List[Dict]:
        return self.search()
