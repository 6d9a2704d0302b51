"""Shared plumbing: errors and configuration."""

from .errors import (
    MwenError,
    ScenarioValidationError,
    ModelBuildError,
    InfeasibleError,
    SolverLimitError,
    ExtractionError,
    ReportIOError,
    ProtocolError,
    AdmmAborted,
)

__all__ = [
    "MwenError",
    "ScenarioValidationError",
    "ModelBuildError",
    "InfeasibleError",
    "SolverLimitError",
    "ExtractionError",
    "ReportIOError",
    "ProtocolError",
    "AdmmAborted",
]
