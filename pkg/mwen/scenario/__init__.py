"""
MWEN scenario data model, validation and bundled communities.
"""

from .models import (
    Scenario,
    TimeGrid,
    GeneratorSpec,
    EnergyStorageSpec,
    GridTieSpec,
    WastewaterSpec,
    TreatmentUnitSpec,
    StorageTankSpec,
    PumpQuadratic,
    Profiles,
    ScenarioOptions,
    pump_ids,
)
from .validation import (
    ScenarioValidator,
    validate_scenario,
    derive_directional_efficiencies,
    net_load,
)
from .loader import ScenarioLoader, load_scenario, save_scenario
from .catalog import ScenarioCatalog

__all__ = [
    'Scenario',
    'TimeGrid',
    'GeneratorSpec',
    'EnergyStorageSpec',
    'GridTieSpec',
    'WastewaterSpec',
    'TreatmentUnitSpec',
    'StorageTankSpec',
    'PumpQuadratic',
    'Profiles',
    'ScenarioOptions',
    'pump_ids',
    'ScenarioValidator',
    'validate_scenario',
    'derive_directional_efficiencies',
    'net_load',
    'ScenarioLoader',
    'load_scenario',
    'save_scenario',
    'ScenarioCatalog',
]
