"""JSON Schema (Draft 2020-12) for scenario files."""

from typing import Any, Dict

_NUMBER = {"type": "number"}
_NONNEG = {"type": "number", "minimum": 0}
_SERIES = {"type": "array", "items": {"type": "number"}}

_PUMP = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"c1": _NUMBER, "c2": _NUMBER, "c3": _NUMBER},
}

SCENARIO_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "MWEN scenario",
    "type": "object",
    "additionalProperties": False,
    "required": ["time", "generators", "storage", "grid", "wastewater",
                 "treatment", "tanks", "profiles", "prices"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "time": {
            "type": "object",
            "additionalProperties": False,
            "required": ["horizon_steps", "step_hours"],
            "properties": {
                "horizon_steps": {"type": "integer"},
                "step_hours": _NUMBER,
            },
        },
        "generators": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "no_load_cost", "marginal_cost", "p_min", "p_max"],
                "properties": {
                    "name": {"type": "string"},
                    "no_load_cost": _NUMBER,
                    "marginal_cost": _NUMBER,
                    "p_min": _NUMBER,
                    "p_max": _NUMBER,
                },
            },
        },
        "storage": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "rated_power", "level_min", "level_max"],
                "properties": {
                    "name": {"type": "string"},
                    "rated_power": _NUMBER,
                    "eff_charge": _NUMBER,
                    "eff_discharge": _NUMBER,
                    "round_trip_efficiency": _NUMBER,
                    "level_min": _NUMBER,
                    "level_max": _NUMBER,
                    "level_initial": {"type": ["number", "null"]},
                    "capacity_note": {"type": ["string", "null"]},
                },
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["tie_limit"],
            "properties": {"tie_limit": _NUMBER},
        },
        "wastewater": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["flow_min", "flow_max", "reclaim_rate",
                                 "reservoir_cap", "energy_intensity"],
                    "properties": {
                        "flow_min": _NUMBER,
                        "flow_max": _NUMBER,
                        "reclaim_rate": _SERIES,
                        "reservoir_cap": _NUMBER,
                        "reservoir_initial": {"type": ["number", "null"]},
                        "energy_intensity": _NUMBER,
                        "pump": _PUMP,
                    },
                },
            ]
        },
        "treatment": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "flow_min", "flow_max", "energy_intensity"],
                "properties": {
                    "name": {"type": "string"},
                    "flow_min": _NUMBER,
                    "flow_max": _NUMBER,
                    "energy_intensity": _NUMBER,
                    "pump": _PUMP,
                },
            },
        },
        "tanks": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "inflow_min", "inflow_max", "outflow_max",
                             "level_min", "level_max"],
                "properties": {
                    "name": {"type": "string"},
                    "inflow_min": _NUMBER,
                    "inflow_max": _NUMBER,
                    "outflow_max": _NUMBER,
                    "level_min": _NUMBER,
                    "level_max": _NUMBER,
                    "level_initial": {"type": ["number", "null"]},
                    "pump": _PUMP,
                },
            },
        },
        "profiles": {
            "type": "object",
            "additionalProperties": False,
            "required": ["power_demand", "water_demand"],
            "properties": {
                "power_demand": _SERIES,
                "renewables": _SERIES,
                "water_demand": _SERIES,
            },
        },
        "prices": {
            "type": "object",
            "additionalProperties": False,
            "required": ["import"],
            "properties": {
                "import": _SERIES,
                "export": _SERIES,
                "export_ratio": _NONNEG,
            },
        },
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "terminal_storage": {"type": "boolean"},
                "tank_pump_driver": {"enum": ["discharge", "charge_and_discharge"]},
                "pwl_segments": {"type": "integer", "minimum": 1},
                "pwl_samples": {"type": "integer", "minimum": 2},
            },
        },
    },
}
