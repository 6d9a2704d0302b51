import logging
from typing import Optional

from mwen.core.config import SolverConfig
from mwen.model_ir import ModelIR
from mwen.otel.telemetry import span
from .base import SolveResult, SolverBackend, solver_registry
from .branch_and_bound import solve_milp
from .brute_force import brute_force_milp
from .highs import solve_highs

logger = logging.getLogger(__name__)


@solver_registry.register
class BuiltinBackend(SolverBackend):
    """Bounded simplex plus branch and bound"""

    name = "builtin"

    def solve(self, model: ModelIR, config: Optional[SolverConfig] = None) -> SolveResult:
        return solve_milp(model, config)


@solver_registry.register
class HighsBackend(SolverBackend):
    name = "highs"

    def solve(self, model: ModelIR, config: Optional[SolverConfig] = None) -> SolveResult:
        return solve_highs(model, config)


@solver_registry.register
class BruteForceBackend(SolverBackend):
    name = "brute_force"

    def solve(self, model: ModelIR, config: Optional[SolverConfig] = None) -> SolveResult:
        return brute_force_milp(model, config=config)


def solve(model: ModelIR, config: Optional[SolverConfig] = None) -> SolveResult:
    """Solve with the backend named in ``config.backend``"""
    config = config or SolverConfig()
    backend = solver_registry.get_backend(config.backend)
    with span("solver.solve", backend=backend.name, model=model.name,
              variables=model.num_variables, constraints=model.num_constraints) as current:
        result = backend.solve(model, config)
        result.backend = backend.name
        if current is not None:
            current.set_attribute("status", result.status.value)
            current.set_attribute("nodes", result.nodes)
    logger.debug(
        f"Solved '{model.name}' ({model.num_variables} vars, {model.num_constraints} rows) "
        f"with {backend.name}: {result.status.value}, objective {result.objective}"
    )
    return result
