from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Type

from mwen.core.config import SolverConfig
from mwen.model_ir import ModelIR


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass
class SolveResult:
    status: SolveStatus
    x: Optional[List[float]] = None
    objective: Optional[float] = None
    best_bound: Optional[float] = None
    # LP only: one dual per constraint, reduced cost per variable
    duals: Optional[List[float]] = None
    reduced_costs: Optional[List[float]] = None
    dual_objective: Optional[float] = None
    iterations: int = 0
    nodes: int = 0
    backend: str = "builtin"
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status == SolveStatus.OPTIMAL

    @property
    def has_solution(self) -> bool:
        return self.x is not None

    def value(self, var_id: int) -> float:
        return self.x[var_id]

    def values(self, var_ids: List[int]) -> List[float]:
        return [self.x[i] for i in var_ids]


class SolverBackend(ABC):
    """The single seam between model builders and a solver implementation"""

    name: str = "abstract"

    @abstractmethod
    def solve(self, model: ModelIR, config: Optional[SolverConfig] = None) -> SolveResult:
        raise NotImplementedError


class SolverRegistry:
    def __init__(self):
        self._backends: Dict[str, Type[SolverBackend]] = {}

    def register(self, backend_class: Type[SolverBackend]) -> Type[SolverBackend]:
        self._backends[backend_class.name] = backend_class
        return backend_class

    def get_backend(self, name: str) -> SolverBackend:
        if name not in self._backends:
            raise ValueError(f"Solver backend '{name}' not found in registry. Available: {self.list_backends()}")
        return self._backends[name]()

    def list_backends(self) -> List[str]:
        return sorted(self._backends.keys())


solver_registry = SolverRegistry()
