"""Constraint family labels attached to every row the model builders emit."""

from typing import Dict

from mwen.core.errors import ExtractionError

# microgrid
GEN_LIMITS = "gen-limits"
STORAGE_CHARGE_RATE = "storage-charge-rate"
STORAGE_DISCHARGE_RATE = "storage-discharge-rate"
STORAGE_EXCLUSIVITY = "storage-exclusivity"
STORAGE_DYNAMICS = "storage-dynamics"
STORAGE_TERMINAL = "storage-terminal"
TIE_IMPORT = "tie-import"
TIE_EXPORT = "tie-export"
TIE_EXCLUSIVITY = "tie-exclusivity"
POWER_BALANCE = "power-balance"

# water
WW_FLOW = "ww-flow"
RESERVOIR_DYNAMICS = "reservoir-dynamics"
WW_POWER = "ww-power"
TREATMENT_FLOW = "treatment-flow"
TREATMENT_POWER = "treatment-power"
TANK_INFLOW = "tank-inflow"
TANK_OUTFLOW = "tank-outflow"
TANK_EXCLUSIVITY = "tank-exclusivity"
TANK_DYNAMICS = "tank-dynamics"
TANK_TERMINAL = "tank-terminal"
WATER_BALANCE = "water-balance"
WATER_POWER = "water-power"
PUMP_CURVE = "pump-curve"

# coordination
PENALTY = "penalty"

DESCRIPTIONS: Dict[str, str] = {
    GEN_LIMITS: "generator output within [p_min, p_max] while committed, 0 otherwise",
    STORAGE_CHARGE_RATE: "storage charge power within rated power while charging",
    STORAGE_DISCHARGE_RATE: "storage discharge power within rated power while discharging",
    STORAGE_EXCLUSIVITY: "storage never charges and discharges in the same step",
    STORAGE_DYNAMICS: "storage level follows charge and discharge with their efficiencies",
    STORAGE_TERMINAL: "storage ends the horizon at or above its initial level",
    TIE_IMPORT: "grid import within the tie limit while importing",
    TIE_EXPORT: "grid export within the tie limit while exporting",
    TIE_EXCLUSIVITY: "grid never imports and exports in the same step",
    POWER_BALANCE: "supply equals net load at every step",
    WW_FLOW: "wastewater treatment flow within its limits while running",
    RESERVOIR_DYNAMICS: "reservoir level follows reclaimed inflow minus treated outflow",
    WW_POWER: "wastewater treatment power is energy intensity times flow",
    TREATMENT_FLOW: "treatment unit flow within its limits while running",
    TREATMENT_POWER: "treatment unit power is energy intensity times flow",
    TANK_INFLOW: "tank inflow within its limits while charging",
    TANK_OUTFLOW: "tank outflow within its limit while discharging",
    TANK_EXCLUSIVITY: "tank never fills and drains in the same step",
    TANK_DYNAMICS: "tank level follows inflow minus outflow",
    TANK_TERMINAL: "tank ends the horizon at or above its initial level",
    WATER_BALANCE: "delivered water meets demand at every step",
    WATER_POWER: "water power is treatment power plus pump power",
    PUMP_CURVE: "pump power equals the fitted curve at the pump flow",
    PENALTY: "epigraph of the consensus penalty",
}


def describe(tag: str) -> str:
    return DESCRIPTIONS.get(tag, tag)


def violation(message: str, tag: str) -> ExtractionError:
    """ExtractionError naming the violated constraint family"""
    return ExtractionError(f"{message} ({describe(tag)})", tag)
