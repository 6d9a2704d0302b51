"""
Tests for the built-in LP/MILP solvers and the backend registry
"""

import numpy as np
import pytest

from mwen.core.config import SolverConfig
from mwen.core.errors import SolverLimitError
from mwen.model_ir import ModelIR, Sense, evaluate
from mwen.solver import (
    SolveStatus,
    brute_force_milp,
    solve,
    solve_lp,
    solve_milp,
    solver_registry,
)


def knapsack() -> ModelIR:
    """values (6, 10, 12), weights (1, 2, 3), capacity 5, as a minimization"""
    model = ModelIR("knapsack")
    items = [model.add_variable(name=f"take{i}", binary=True) for i in range(3)]
    model.add_linear_constraint(list(zip(items, (1.0, 2.0, 3.0))), Sense.LE, 5.0, tag="capacity")
    for var, value in zip(items, (6.0, 10.0, 12.0)):
        model.add_objective_term(var, -value)
    return model


def random_milp(rng: np.random.Generator, binaries: int, continuous: int, rows: int) -> ModelIR:
    """Bounded feasible MILP: constraints are slack at a random integral point"""
    model = ModelIR("random")
    ids = [model.add_variable(name=f"y{i}", binary=True) for i in range(binaries)]
    ids += [model.add_variable(name=f"x{i}", upper=10.0) for i in range(continuous)]
    point = np.concatenate([rng.integers(0, 2, binaries), rng.uniform(0, 10, continuous)])
    for r in range(rows):
        coeffs = rng.uniform(-5, 5, len(ids)).round(3)
        rhs = float(coeffs @ point) + float(rng.uniform(0, 3))
        model.add_linear_constraint(list(zip(ids, coeffs)), Sense.LE, rhs, name=f"r{r}")
    for var, cost in zip(ids, rng.uniform(-10, 10, len(ids)).round(3)):
        model.add_objective_term(var, float(cost))
    return model


class TestSolveLp:
    """Test the bounded-variable simplex"""

    def test_upper_bound_optimum(self):
        model = ModelIR()
        x = model.add_variable(name="x", upper=5.0)
        model.add_objective_term(x, -1.0)
        result = solve_lp(model)
        assert result.status == SolveStatus.OPTIMAL
        assert result.x[x] == pytest.approx(5.0)
        assert result.objective == pytest.approx(-5.0)

    def test_covering_row(self):
        model = ModelIR()
        x = model.add_variable(name="x")
        y = model.add_variable(name="y")
        model.add_linear_constraint([(x, 1.0), (y, 1.0)], Sense.GE, 2.0)
        model.add_objective_term(x, 1.0)
        model.add_objective_term(y, 1.0)
        assert solve_lp(model).objective == pytest.approx(2.0)

    def test_infeasible(self):
        model = ModelIR()
        x = model.add_variable(name="x")
        model.add_linear_constraint([(x, 1.0)], Sense.GE, 1.0)
        model.add_linear_constraint([(x, 1.0)], Sense.LE, 0.0)
        assert solve_lp(model).status == SolveStatus.INFEASIBLE

    def test_unbounded(self):
        model = ModelIR()
        x = model.add_variable(name="x")
        model.add_objective_term(x, -1.0)
        assert solve_lp(model).status == SolveStatus.UNBOUNDED

    def test_objective_constant(self):
        model = ModelIR()
        x = model.add_variable(name="x", lower=1.0, upper=2.0)
        model.add_objective_term(x, 1.0)
        model.add_objective_constant(10.0)
        assert solve_lp(model).objective == pytest.approx(11.0)

    def test_strong_duality_on_random_lps(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n, m = int(rng.integers(1, 21)), int(rng.integers(1, 21))
            model = random_milp(rng, 0, n, m)
            result = solve_lp(model)
            assert result.status == SolveStatus.OPTIMAL
            scale = max(1.0, abs(result.objective))
            assert abs(result.dual_objective - result.objective) <= 1e-7 * scale
            assert evaluate(model, result.x).max_violation <= 1e-7 * scale

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        model = random_milp(rng, 0, 12, 10)
        first, second = solve_lp(model), solve_lp(model)
        assert first.x == second.x
        assert first.objective == second.objective


class TestSolveMilp:
    """Test branch and bound against enumeration"""

    def test_pick_one(self):
        model = ModelIR()
        x = model.add_variable(name="x", binary=True)
        y = model.add_variable(name="y", binary=True)
        model.add_linear_constraint([(x, 1.0), (y, 1.0)], Sense.LE, 1.0)
        model.add_objective_term(x, -1.0)
        model.add_objective_term(y, -1.0)
        assert solve_milp(model).objective == pytest.approx(-1.0)

    def test_knapsack(self):
        result = solve_milp(knapsack())
        assert result.status == SolveStatus.OPTIMAL
        assert result.objective == pytest.approx(-22.0)
        assert [round(v) for v in result.x] == [0, 1, 1]

    def test_node_limit(self):
        rng = np.random.default_rng(11)
        model = random_milp(rng, 12, 4, 6)
        result = solve_milp(model, node_limit=1)
        assert result.status in (SolveStatus.ITERATION_LIMIT, SolveStatus.OPTIMAL)
        assert result.nodes <= 1 or result.status == SolveStatus.OPTIMAL

    @pytest.mark.parametrize("limit", [1, 2, 3, 4, 5])
    def test_node_limit_keeps_valid_bound(self, limit):
        result = solve_milp(knapsack(), node_limit=limit)
        if result.status == SolveStatus.OPTIMAL:
            assert result.objective == pytest.approx(-22.0)
        else:
            assert result.status == SolveStatus.ITERATION_LIMIT
            assert result.best_bound is not None
            assert result.best_bound <= -22.0 + 1e-9
            if result.x is not None:
                assert result.objective >= -22.0 - 1e-9

    def test_node_limit_bound_on_random_models(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            model = random_milp(rng, int(rng.integers(3, 9)), int(rng.integers(0, 5)), int(rng.integers(1, 5)))
            oracle = brute_force_milp(model)
            if oracle.status != SolveStatus.OPTIMAL:
                continue
            for limit in (2, 3, 5, 8):
                result = solve_milp(model, node_limit=limit)
                if result.status == SolveStatus.ITERATION_LIMIT and result.best_bound is not None:
                    assert result.best_bound <= oracle.objective + 1e-6

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(2024)
        for _ in range(15):
            model = random_milp(rng, int(rng.integers(1, 9)), int(rng.integers(0, 8)), int(rng.integers(1, 6)))
            bnb = solve_milp(model)
            oracle = brute_force_milp(model)
            assert bnb.status == oracle.status
            if oracle.status == SolveStatus.OPTIMAL:
                assert bnb.objective == pytest.approx(oracle.objective, abs=1e-6)

    @pytest.mark.slow
    def test_oracle_equivalence_wide(self):
        rng = np.random.default_rng(99)
        for _ in range(40):
            model = random_milp(rng, int(rng.integers(1, 13)), int(rng.integers(0, 31)), int(rng.integers(1, 10)))
            bnb = solve_milp(model)
            oracle = brute_force_milp(model, max_binaries=12)
            if oracle.status == SolveStatus.OPTIMAL:
                assert bnb.objective == pytest.approx(oracle.objective, abs=1e-6)


class TestBruteForce:
    """Test the enumeration oracle"""

    def test_no_binaries_matches_lp(self):
        model = ModelIR()
        x = model.add_variable(name="x", upper=5.0)
        model.add_objective_term(x, -1.0)
        assert brute_force_milp(model).objective == solve_lp(model).objective

    def test_knapsack(self):
        assert brute_force_milp(knapsack()).objective == pytest.approx(-22.0)

    def test_all_assignments_infeasible(self):
        model = ModelIR()
        u = model.add_variable(name="u", binary=True)
        x = model.add_variable(name="x", upper=1.0)
        model.add_linear_constraint([(x, 1.0), (u, 1.0)], Sense.GE, 3.0)
        assert brute_force_milp(model).status == SolveStatus.INFEASIBLE

    def test_too_many_binaries(self):
        model = ModelIR()
        for i in range(4):
            model.add_variable(name=f"u{i}", binary=True)
        with pytest.raises(SolverLimitError) as exc:
            brute_force_milp(model, max_binaries=3)
        assert exc.value.exit_code == 4


class TestSolverRegistry:
    """Test the backend seam"""

    def test_builtin_backends_registered(self):
        assert solver_registry.list_backends() == ["brute_force", "builtin", "highs"]

    @pytest.mark.parametrize("backend", ["builtin", "brute_force"])
    def test_solve_dispatch(self, backend):
        result = solve(knapsack(), SolverConfig(backend=backend))
        assert result.backend == backend
        assert result.objective == pytest.approx(-22.0)

    def test_unknown_backend(self):
        with pytest.raises(ValueError, match="not found"):
            solver_registry.get_backend("cplex")
