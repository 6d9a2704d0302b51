"""
Centralized vs. decentralized comparison runs.
"""

import logging
from typing import Dict, List, Mapping, Optional, Sequence

from pydantic import BaseModel

from mwen.admm import AdmmConfig, DecentralizedSolution, IterationRecord, run_admm
from mwen.core.config import PwlConfig, SolverConfig
from mwen.core.errors import AdmmAborted, MwenError
from mwen.models import solve_central
from mwen.pwl import PwlCurve, fit_scenario_curves
from mwen.scenario.models import Scenario

logger = logging.getLogger(__name__)

CENTRAL = "central"


class ConvergencePoint(BaseModel):
    iter: int
    C_E: float
    f_W: float
    norm_r: float
    norm_s: float
    eps: float
    lambda_norm: float
    # C_E over the centralized cost, when that cost is known and nonzero
    normalized_objective: Optional[float] = None


class RunRow(BaseModel):
    scenario: str
    method: str
    rho: Optional[float] = None
    ob_window: Optional[int] = None
    status: str = "ok"
    cost: Optional[float] = None
    pct_diff: Optional[float] = None
    # last MEM subproblem objective and its difference, reported alongside the restored cost
    mem_cost: Optional[float] = None
    mem_pct_diff: Optional[float] = None
    final_eps: Optional[float] = None
    iterations: Optional[int] = None
    water_energy_kwh: Optional[float] = None
    pct_energy_diff: Optional[float] = None
    stop_reason: str = ""
    error: str = ""

    @property
    def tag(self) -> str:
        return run_tag(self.method, self.rho, self.ob_window)


class ComparisonReport(BaseModel):
    scenario: str
    central_cost: Optional[float] = None
    central_water_energy_kwh: Optional[float] = None
    rows: List[RunRow] = []
    convergence: Dict[str, List[ConvergencePoint]] = {}

    def decentralized(self) -> List[RunRow]:
        return [row for row in self.rows if row.method != CENTRAL]

    def row(self, method: str, rho: Optional[float] = None, ob_window: Optional[int] = None) -> Optional[RunRow]:
        for candidate in self.rows:
            if candidate.method == method and candidate.rho == rho and (ob_window is None or candidate.ob_window == ob_window):
                return candidate
        return None


def run_tag(method: str, rho: Optional[float] = None, ob_window: Optional[int] = None) -> str:
    if method == CENTRAL:
        return CENTRAL
    tag = f"{method}_rho{rho:g}"
    if method == "objective_based" and ob_window is not None:
        tag += f"_ks{ob_window}"
    return tag


def pct_difference(value: Optional[float], reference: Optional[float]) -> Optional[float]:
    """100 * (value - reference) / reference; 0 when both are 0, None when undefined"""
    if value is None or reference is None:
        return None
    if reference == 0:
        return 0.0 if abs(value) <= 1e-12 else None
    return 100.0 * (value - reference) / reference


def convergence_points(records: Sequence[IterationRecord], central_cost: Optional[float] = None) -> List[ConvergencePoint]:
    points = []
    for rec in records:
        normalized = rec.mem_cost / central_cost if central_cost else None
        points.append(ConvergencePoint(
            iter=rec.k,
            C_E=rec.mem_cost,
            f_W=rec.water_energy,
            norm_r=rec.norm_r,
            norm_s=rec.norm_s,
            eps=rec.eps,
            lambda_norm=rec.lambda_norm,
            normalized_objective=normalized,
        ))
    return points


def decentralized_row(
    scenario: Scenario,
    solution: DecentralizedSolution,
    config: AdmmConfig,
    central_cost: Optional[float],
    central_energy: Optional[float],
) -> RunRow:
    return RunRow(
        scenario=scenario.name,
        method=config.mode,
        rho=config.rho,
        ob_window=config.ob_window if config.mode == "objective_based" else None,
        cost=solution.restored_cost,
        pct_diff=pct_difference(solution.restored_cost, central_cost),
        mem_cost=solution.last_mem_cost,
        mem_pct_diff=pct_difference(solution.last_mem_cost, central_cost),
        final_eps=solution.final_eps,
        iterations=len(solution.iterations),
        water_energy_kwh=solution.water_energy_kwh,
        pct_energy_diff=pct_difference(solution.water_energy_kwh, central_energy),
        stop_reason=solution.stop_reason,
    )


def run_compare(
    scenario: Scenario,
    rhos: Sequence[float] = (0.01, 0.1, 1.0),
    modes: Sequence[str] = ("standard", "objective_based"),
    config: Optional[AdmmConfig] = None,
    solver_config: Optional[SolverConfig] = None,
    curves: Optional[Mapping[str, PwlCurve]] = None,
    ob_windows: Optional[Sequence[int]] = None,
    pwl_config: Optional[PwlConfig] = None,
) -> ComparisonReport:
    """
    Solve the centralized benchmark once and ADMM for every (mode, rho[, k_s])

    A failed run becomes a row with status ``failed``; it never stops the sweep.
    """
    config = config or AdmmConfig()
    if curves is None:
        curves = fit_scenario_curves(scenario, pwl_config, solver_config)
    report = ComparisonReport(scenario=scenario.name)

    try:
        central = solve_central(scenario, curves, solver_config)
        report.central_cost = central.cost
        report.central_water_energy_kwh = central.water_energy_kwh
        report.rows.append(RunRow(
            scenario=scenario.name,
            method=CENTRAL,
            cost=central.cost,
            pct_diff=0.0,
            water_energy_kwh=central.water_energy_kwh,
            pct_energy_diff=0.0,
            stop_reason=central.status,
        ))
    except MwenError as e:
        logger.warning(f"Centralized run failed for '{scenario.name}': {e}")
        report.rows.append(RunRow(scenario=scenario.name, method=CENTRAL, status="failed", error=str(e)))

    windows = list(ob_windows) if ob_windows else [config.ob_window]
    for mode in modes:
        for rho in rhos:
            for window in (windows if mode in ("objective_based", "ob") else [config.ob_window]):
                run_config = AdmmConfig.model_validate(
                    {**config.model_dump(), "mode": mode, "rho": float(rho), "ob_window": int(window)}
                )
                tag = run_tag(run_config.mode, run_config.rho,
                              run_config.ob_window if run_config.mode == "objective_based" else None)
                logger.info(f"Comparison run {tag} on '{scenario.name}'")
                try:
                    solution = run_admm(scenario, curves, run_config, solver_config)
                except AdmmAborted as e:
                    logger.warning(f"Run {tag} failed: {e}")
                    report.rows.append(RunRow(
                        scenario=scenario.name,
                        method=run_config.mode,
                        rho=run_config.rho,
                        ob_window=run_config.ob_window if run_config.mode == "objective_based" else None,
                        status="failed",
                        iterations=len(e.iterations),
                        error=str(e),
                    ))
                    report.convergence[tag] = convergence_points(e.iterations, report.central_cost)
                    continue
                report.rows.append(decentralized_row(
                    scenario, solution, run_config, report.central_cost, report.central_water_energy_kwh
                ))
                report.convergence[tag] = convergence_points(solution.iterations, report.central_cost)
    return report

