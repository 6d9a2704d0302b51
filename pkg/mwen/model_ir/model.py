"""
Solver-agnostic optimization model.

A ``ModelIR`` holds bounded continuous/binary variables, sparse linear
constraints tagged with the equation they implement, and a linear objective
that is always minimized. Builders add to it single-threaded; ``freeze()``
makes it read-only so it can be shared between solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from mwen.core.errors import ModelBuildError

INF = math.inf


class Integrality(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass(frozen=True)
class VariableDef:
    """A decision variable with bounds and integrality"""
    name: str = ""
    lower: float = 0.0
    upper: float = INF
    integrality: Integrality = Integrality.CONTINUOUS

    @property
    def is_binary(self) -> bool:
        return self.integrality == Integrality.BINARY


@dataclass(frozen=True)
class LinearConstraint:
    """sum(coef * x[id]) <sense> rhs"""
    coefficients: Tuple[Tuple[int, float], ...]
    sense: Sense
    rhs: float
    tag: str = ""
    name: str = ""

    def lhs(self, values: Sequence[float]) -> float:
        return math.fsum(coef * values[var] for var, coef in self.coefficients)

    def violation(self, values: Sequence[float]) -> float:
        """Signed violation: > 0 means violated; equality returns lhs - rhs"""
        lhs = self.lhs(values)
        if self.sense == Sense.LE:
            return lhs - self.rhs
        if self.sense == Sense.GE:
            return self.rhs - lhs
        return lhs - self.rhs


@dataclass
class EvaluationReport:
    objective: float
    violations: List[Tuple[int, float]]
    bound_violations: List[Tuple[int, float]]
    max_violation: float

    def worst(self, model: "ModelIR", count: int = 5) -> List[str]:
        """Human-readable list of the largest violations, citing constraint tags"""
        ranked = sorted(self.violations, key=lambda item: -_magnitude(model.constraints[item[0]], item[1]))
        out = []
        for cid, value in ranked[:count]:
            con = model.constraints[cid]
            if _magnitude(con, value) <= 0:
                break
            out.append(f"{con.tag or 'untagged'} {con.name or cid}: {value:+.3e}")
        return out


def _magnitude(con: LinearConstraint, value: float) -> float:
    return abs(value) if con.sense == Sense.EQ else max(0.0, value)


class ModelIR:
    """Variables, linear constraints and a minimized linear objective"""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: List[VariableDef] = []
        self.constraints: List[LinearConstraint] = []
        self.objective: Dict[int, float] = {}
        self.objective_constant: float = 0.0
        self._names: Dict[str, int] = {}
        self._frozen = False

    # building

    def add_variable(
        self,
        definition: Optional[VariableDef] = None,
        *,
        name: str = "",
        lower: float = 0.0,
        upper: float = INF,
        binary: bool = False,
    ) -> int:
        """
        Add a variable and return its id

        Binary variables have their bounds intersected with [0, 1].

        Raises:
            ModelBuildError: inverted bounds, duplicate name, frozen model
        """
        self._check_mutable()
        if definition is None:
            definition = VariableDef(
                name=name,
                lower=lower,
                upper=upper,
                integrality=Integrality.BINARY if binary else Integrality.CONTINUOUS,
            )
        lower, upper = float(definition.lower), float(definition.upper)
        if definition.is_binary:
            lower, upper = max(lower, 0.0), min(upper, 1.0)
        if math.isnan(lower) or math.isnan(upper) or lower > upper:
            raise ModelBuildError(
                f"Variable '{definition.name}': lower bound {definition.lower} exceeds upper bound {definition.upper}"
            )
        var_id = len(self.variables)
        var_name = definition.name or f"x{var_id}"
        if var_name in self._names:
            raise ModelBuildError(f"Duplicate variable name '{var_name}'")
        self._names[var_name] = var_id
        self.variables.append(VariableDef(var_name, lower, upper, definition.integrality))
        return var_id

    def add_linear_constraint(
        self,
        constraint: Union[LinearConstraint, Iterable[Tuple[int, float]]],
        sense: Optional[Union[Sense, str]] = None,
        rhs: Optional[float] = None,
        tag: str = "",
        name: str = "",
    ) -> int:
        """
        Add a constraint, either as a LinearConstraint or as (coefficients, sense, rhs)

        Raises:
            ModelBuildError: unknown variable id, duplicate id, empty row
        """
        self._check_mutable()
        if not isinstance(constraint, LinearConstraint):
            constraint = LinearConstraint(
                coefficients=tuple((int(v), float(c)) for v, c in constraint),
                sense=Sense(sense),
                rhs=float(rhs),
                tag=tag,
                name=name,
            )
        ids = [var for var, _ in constraint.coefficients]
        if not ids:
            holds = (
                (constraint.sense == Sense.LE and 0.0 <= constraint.rhs)
                or (constraint.sense == Sense.GE and 0.0 >= constraint.rhs)
                or (constraint.sense == Sense.EQ and constraint.rhs == 0.0)
            )
            raise ModelBuildError(
                f"Constraint '{constraint.name or constraint.tag}' has no coefficients "
                f"(0 {constraint.sense.value} {constraint.rhs} is "
                f"{'trivially true' if holds else 'vacuously infeasible'}); empty rows are rejected"
            )
        if len(set(ids)) != len(ids):
            raise ModelBuildError(f"Constraint '{constraint.name or constraint.tag}' repeats a variable id")
        for var in ids:
            if not 0 <= var < len(self.variables):
                raise ModelBuildError(f"Constraint '{constraint.name or constraint.tag}' references unknown variable id {var}")
        self.constraints.append(constraint)
        return len(self.constraints) - 1

    def add_objective_term(self, var_id: int, coefficient: float) -> None:
        self._check_mutable()
        if not 0 <= var_id < len(self.variables):
            raise ModelBuildError(f"Objective references unknown variable id {var_id}")
        self.objective[var_id] = self.objective.get(var_id, 0.0) + float(coefficient)

    def add_objective_constant(self, value: float) -> None:
        self._check_mutable()
        self.objective_constant += float(value)

    def fix_variable(self, var_id: int, value: float) -> None:
        """Replace a variable's bounds with [value, value]"""
        self._check_mutable()
        var = self.variables[var_id]
        self.variables[var_id] = VariableDef(var.name, float(value), float(value), var.integrality)

    def freeze(self) -> "ModelIR":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def copy(self, name: Optional[str] = None) -> "ModelIR":
        """Unfrozen copy sharing the (immutable) variable and constraint records"""
        other = ModelIR(name or self.name)
        other.variables = list(self.variables)
        other.constraints = list(self.constraints)
        other.objective = dict(self.objective)
        other.objective_constant = self.objective_constant
        other._names = dict(self._names)
        return other

    def _check_mutable(self) -> None:
        if self._frozen:
            raise ModelBuildError(f"Model '{self.name}' is frozen")

    # queries

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def var_id(self, name: str) -> int:
        return self._names[name]

    def binary_ids(self) -> List[int]:
        return [i for i, v in enumerate(self.variables) if v.is_binary]

    def constraints_tagged(self, tag: str) -> List[int]:
        return [i for i, c in enumerate(self.constraints) if c.tag == tag]

    def tags(self) -> Dict[int, str]:
        """Constraint id -> equation label"""
        return {i: c.tag for i, c in enumerate(self.constraints) if c.tag}

    def without_tag(self, tag: str) -> "ModelIR":
        """Copy with every constraint carrying ``tag`` removed"""
        other = self.copy(f"{self.name}-minus-{tag}")
        other.constraints = [c for c in self.constraints if c.tag != tag]
        return other

    def objective_value(self, values: Sequence[float]) -> float:
        return self.objective_constant + math.fsum(c * values[v] for v, c in self.objective.items())

    def to_arrays(self) -> "ModelArrays":
        n, m = len(self.variables), len(self.constraints)
        c = np.zeros(n)
        for var, coef in self.objective.items():
            c[var] = coef
        A = np.zeros((m, n))
        senses = []
        rhs = np.zeros(m)
        for i, con in enumerate(self.constraints):
            for var, coef in con.coefficients:
                A[i, var] = coef
            senses.append(con.sense)
            rhs[i] = con.rhs
        lower = np.array([v.lower for v in self.variables], dtype=float)
        upper = np.array([v.upper for v in self.variables], dtype=float)
        binary = np.array([v.is_binary for v in self.variables], dtype=bool)
        return ModelArrays(c, A, senses, rhs, lower, upper, binary, self.objective_constant)


@dataclass
class ModelArrays:
    """Dense array view of a ModelIR used by the solvers"""
    c: np.ndarray
    A: np.ndarray
    senses: List[Sense]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    binary: np.ndarray
    objective_constant: float = 0.0


def evaluate(model: ModelIR, assignment: Union[Mapping[int, float], Sequence[float]]) -> EvaluationReport:
    """
    Objective value and per-constraint violations of an assignment

    Raises:
        ModelBuildError: assignment misses variables
    """
    n = model.num_variables
    if isinstance(assignment, Mapping):
        missing = [i for i in range(n) if i not in assignment]
        if missing:
            raise ModelBuildError(f"Assignment is missing {len(missing)} variables (first id {missing[0]})")
        values = [float(assignment[i]) for i in range(n)]
    else:
        if len(assignment) < n:
            raise ModelBuildError(f"Assignment covers {len(assignment)} of {n} variables")
        values = [float(v) for v in assignment[:n]]

    violations = [(cid, con.violation(values)) for cid, con in enumerate(model.constraints)]
    bound_violations = []
    for i, var in enumerate(model.variables):
        excess = max(var.lower - values[i], values[i] - var.upper, 0.0)
        if excess > 0:
            bound_violations.append((i, excess))

    worst = 0.0
    for cid, value in violations:
        worst = max(worst, _magnitude(model.constraints[cid], value))
    for _, excess in bound_violations:
        worst = max(worst, excess)
    return EvaluationReport(model.objective_value(values), violations, bound_violations, worst)


def cut_points(center: float, interval: Tuple[float, float], cut_count: int, spacing: str = "uniform") -> List[float]:
    """
    Tangency points for a penalty epigraph

    ``uniform`` spreads points evenly over the interval; ``geometric`` halves
    the distance to the center at each step so the cuts are densest where an
    ADMM iterate converges.
    """
    lo, hi = interval
    if cut_count <= 1:
        return [center]
    if spacing == "uniform":
        return [float(p) for p in np.linspace(lo, hi, cut_count)]
    if spacing != "geometric":
        raise ModelBuildError(f"Unknown cut spacing '{spacing}'")
    per_side = (cut_count - 1) // 2
    points = {center}
    for j in range(per_side):
        points.add(center - (center - lo) / 2 ** j)
        points.add(center + (hi - center) / 2 ** j)
    if cut_count % 2 == 0:
        points.add(lo if center - lo >= hi - center else hi)
    return sorted(points)


def add_tangent_cut(model: ModelIR, epigraph_id: int, var_id: int, center: float, weight: float, point: float, tag: str = "penalty") -> int:
    """q >= weight*(p-c)^2 + 2*weight*(p-c)*(x-p), the tangent of weight*(x-c)^2 at p"""
    slope = 2.0 * weight * (point - center)
    rhs = weight * (point - center) ** 2 - slope * point
    if slope == 0.0:
        return model.add_linear_constraint([(epigraph_id, 1.0)], Sense.GE, rhs, tag=tag)
    return model.add_linear_constraint([(epigraph_id, 1.0), (var_id, -slope)], Sense.GE, rhs, tag=tag)


def add_quadratic_penalty_epigraph(
    model: ModelIR,
    var_id: int,
    center: float,
    weight: float,
    interval: Tuple[float, float],
    cut_count: int = 17,
    spacing: str = "uniform",
    name: str = "",
    tag: str = "penalty",
) -> int:
    """
    Linearize weight*(x - center)^2 with an epigraph variable and tangent cuts

    The epigraph variable enters the objective with coefficient 1. Cuts never
    overestimate the quadratic and are exact at their tangency points.

    Returns:
        Id of the epigraph variable
    """
    if weight < 0:
        raise ModelBuildError(f"Penalty weight must be >= 0, got {weight}")
    lo, hi = float(interval[0]), float(interval[1])
    if lo > hi:
        raise ModelBuildError(f"Empty penalty interval [{lo}, {hi}]")
    if not lo <= center <= hi:
        raise ModelBuildError(f"Penalty interval [{lo}, {hi}] does not contain center {center}")
    if cut_count < 1:
        raise ModelBuildError(f"cut_count must be >= 1, got {cut_count}")

    q = model.add_variable(name=name or f"q[{model.variables[var_id].name}]", lower=0.0)
    model.add_objective_term(q, 1.0)
    if weight == 0.0:
        model.add_linear_constraint([(q, 1.0)], Sense.GE, 0.0, tag=tag)
        return q
    for point in cut_points(center, (lo, hi), cut_count, spacing):
        add_tangent_cut(model, q, var_id, center, weight, point, tag=tag)
    return q


def export_lp(model: ModelIR) -> str:
    """Readable LP-style dump for debugging; not meant for other tools"""

    def term(coef: float, var: int, first: bool) -> str:
        sign = "-" if coef < 0 else ("" if first else "+")
        return f"{sign} {abs(coef):.12g} {model.variables[var].name}".strip()

    def expr(items: Iterable[Tuple[int, float]]) -> str:
        parts = [term(c, v, i == 0) for i, (v, c) in enumerate(items)]
        return " ".join(parts) if parts else "0"

    lines = [f"\\ Model {model.name}", "Minimize"]
    obj = expr(sorted(model.objective.items()))
    if model.objective_constant:
        obj += f" + {model.objective_constant:.12g}"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    for cid, con in enumerate(model.constraints):
        label = con.name or f"c{cid}"
        tag = f" \\ {con.tag}" if con.tag else ""
        lines.append(f" {label}: {expr(con.coefficients)} {con.sense.value} {con.rhs:.12g}{tag}")
    lines.append("Bounds")
    for var in model.variables:
        lo = "-inf" if var.lower == -INF else f"{var.lower:.12g}"
        hi = "+inf" if var.upper == INF else f"{var.upper:.12g}"
        lines.append(f" {lo} <= {var.name} <= {hi}")
    binaries = [v.name for v in model.variables if v.is_binary]
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {name}" for name in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"
