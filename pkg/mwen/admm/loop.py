"""
Decentralized MWEN coordination loop.

The microgrid side drives the iterations. The water side sits behind a
``WaterPeer``: in-process it is a ``LocalPeer`` around a ``WaterAgent``; over
a socket the same ``WaterAgent`` runs in the other process. Both sides keep
their own copy of the multipliers, updated from the exchanged power series,
so multipliers never travel.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import List, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel

from mwen.core.config import SolverConfig
from mwen.core.errors import AdmmAborted, MwenError
from mwen.models import MemDispatch, WaterDispatch, water_power_bounds
from mwen.otel.telemetry import span
from mwen.pwl import PwlCurve
from mwen.scenario.models import Scenario
from .config import AdmmConfig
from .residuals import dual_update, feasibility_metric, norm, ob_stop_check, residuals
from .subproblems import mem_subproblem, min_energy_dispatch, mwm_subproblem, restore_feasibility

logger = logging.getLogger(__name__)

STOP_EPS = "eps_threshold"
STOP_OBJECTIVE = "objective_based"
STOP_MAX_ITERS = "max_iters"


class IterationRecord(BaseModel):
    k: int
    mem_power: Tuple[float, ...]
    water_power: Tuple[float, ...]
    multipliers: Tuple[float, ...]
    r: Tuple[float, ...]
    s: Tuple[float, ...]
    eps: float
    mem_cost: float
    water_energy: float

    @property
    def norm_r(self) -> float:
        return norm(self.r)

    @property
    def norm_s(self) -> float:
        return norm(self.s)

    @property
    def lambda_norm(self) -> float:
        return norm(self.multipliers)


class DecentralizedSolution(BaseModel):
    mem: MemDispatch
    # only the in-process run sees the water dispatch
    water: Optional[WaterDispatch] = None
    restored_cost: float
    last_mem_cost: float
    iterations: List[IterationRecord]
    stop_reason: str

    @property
    def final_eps(self) -> float:
        return self.iterations[-1].eps if self.iterations else 0.0

    @property
    def water_profile(self) -> Tuple[float, ...]:
        return self.iterations[-1].water_power if self.iterations else ()

    @property
    def water_energy_kwh(self) -> float:
        return self.iterations[-1].water_energy if self.iterations else 0.0


def water_energy(profile: Sequence[float], dt: float) -> float:
    return dt * math.fsum(profile)


class WaterAgent:
    """
    The water operator's side of the loop

    Holds its scenario slice, curves and multipliers. ``solve`` answers a
    coupling target with a fresh water power series; ``observe`` closes an
    iteration and updates the multipliers from the two series.
    """

    def __init__(
        self,
        scenario: Scenario,
        curves: Mapping[str, PwlCurve],
        config: AdmmConfig,
        bounds: Tuple[float, float],
        solver_config: Optional[SolverConfig] = None,
    ):
        self.scenario = scenario
        self.curves = dict(curves)
        self.config = config
        self.bounds = bounds
        self.solver_config = solver_config
        self.multipliers: List[float] = [0.0] * scenario.horizon
        self.own: List[float] = []
        self.target: List[float] = []
        self.dispatch: Optional[WaterDispatch] = None
        self._pending = False

    def initial_profile(self) -> List[float]:
        self.dispatch = min_energy_dispatch(self.scenario, self.curves, self.solver_config)
        self.own = list(self.dispatch.power)
        logger.info(f"Water agent: minimum-energy profile uses {self.dispatch.energy_kwh:.4f} kWh")
        return list(self.own)

    def solve(self, k: int, target: Sequence[float]) -> List[float]:
        target = [float(v) for v in target]
        if self._pending:
            # water-first order: this target is the microgrid's answer to our last profile
            self.multipliers = dual_update(self.multipliers, self.config.rho, target, self.own)
            self._pending = False
        step = mwm_subproblem(
            self.scenario, self.curves, self.multipliers, target, self.config.rho, self.bounds,
            self.config, self.solver_config, previous=self.own,
        )
        self.own, self.target, self.dispatch = step.power, target, step.dispatch
        return list(self.own)

    def observe(self, k: int, mem_cost: float) -> None:
        if self.config.order == "mem_first":
            self.multipliers = dual_update(self.multipliers, self.config.rho, self.target, self.own)
        else:
            self._pending = True


class WaterPeer(ABC):
    """How the microgrid side reaches the water side"""

    @abstractmethod
    def initial_profile(self) -> List[float]:
        raise NotImplementedError

    @abstractmethod
    def solve(self, k: int, target: Sequence[float]) -> List[float]:
        raise NotImplementedError

    @abstractmethod
    def observe(self, k: int, mem_cost: float) -> None:
        raise NotImplementedError

    def finish(self, k: int, reason: str) -> None:
        pass

    @property
    def dispatch(self) -> Optional[WaterDispatch]:
        return None


class LocalPeer(WaterPeer):
    def __init__(self, agent: WaterAgent):
        self.agent = agent

    def initial_profile(self) -> List[float]:
        return self.agent.initial_profile()

    def solve(self, k: int, target: Sequence[float]) -> List[float]:
        return self.agent.solve(k, target)

    def observe(self, k: int, mem_cost: float) -> None:
        self.agent.observe(k, mem_cost)

    @property
    def dispatch(self) -> Optional[WaterDispatch]:
        return self.agent.dispatch


def _stop_reason(config: AdmmConfig, records: List[IterationRecord]) -> Optional[str]:
    eps = records[-1].eps
    if eps <= config.eps_threshold:
        return STOP_EPS
    if config.mode == "objective_based" and ob_stop_check(
        [rec.mem_cost for rec in records], [rec.eps for rec in records], config.ob_window, config.ob_beta
    ):
        return STOP_OBJECTIVE
    return None


def run_admm(
    scenario: Scenario,
    curves: Optional[Mapping[str, PwlCurve]],
    config: Optional[AdmmConfig] = None,
    solver_config: Optional[SolverConfig] = None,
    peer: Optional[WaterPeer] = None,
) -> DecentralizedSolution:
    """
    Run ADMM / OB-ADMM and restore a coordinated microgrid dispatch

    Args:
        scenario: Full scenario (in-process) or the microgrid slice (agent mode)
        curves: Pump curves; may be None when ``peer`` is remote and the
            config carries the coupling bounds
        config: Loop settings
        solver_config: Settings for every subproblem solve
        peer: Water side; defaults to an in-process agent

    Raises:
        AdmmAborted: a subproblem or the peer failed; carries the iteration log
    """
    config = config or AdmmConfig()
    bounds = config.coupling_bounds
    if bounds is None:
        if curves is None:
            raise AdmmAborted("Coupling bounds need either pump curves or config.coupling_bounds")
        bounds = water_power_bounds(scenario, curves)
    mem_scenario = scenario.mem_view()
    if peer is None:
        peer = LocalPeer(WaterAgent(scenario.mwm_view(), curves, config, bounds, solver_config))

    T, dt = scenario.horizon, scenario.dt
    records: List[IterationRecord] = []
    multipliers = [0.0] * T
    reason = STOP_MAX_ITERS
    k = 0
    logger.info(
        f"ADMM on '{scenario.name}': mode {config.mode}, rho {config.rho}, order {config.order}, "
        f"coupling bounds [{bounds[0]:.4g}, {bounds[1]:.4g}]"
    )

    with span("admm.run", scenario=scenario.name, mode=config.mode, rho=config.rho) as run_span:
        try:
            water = peer.initial_profile()
            mem: List[float] = list(water) if config.order == "mwm_first" else []
            previous_pair: Optional[Tuple[List[float], List[float]]] = None
            for k in range(1, config.max_iters + 1):
                with span("admm.iteration", k=k) as it_span:
                    if config.order == "mem_first":
                        step = mem_subproblem(mem_scenario, multipliers, water, config.rho, bounds, config,
                                              solver_config, previous=mem or None)
                        mem = step.power
                        water = peer.solve(k, mem)
                    else:
                        water = peer.solve(k, mem)
                        step = mem_subproblem(mem_scenario, multipliers, water, config.rho, bounds, config,
                                              solver_config, previous=mem)
                        mem = step.power
                    peer.observe(k, step.cost)

                    multipliers = dual_update(multipliers, config.rho, mem, water)
                    if previous_pair is None:
                        r, s = residuals(mem, water)
                    else:
                        r, s = residuals(mem, water, *previous_pair)
                    previous_pair = (mem, water)
                    eps = feasibility_metric(r, s)
                    records.append(IterationRecord(
                        k=k,
                        mem_power=tuple(mem),
                        water_power=tuple(water),
                        multipliers=tuple(multipliers),
                        r=tuple(r),
                        s=tuple(s),
                        eps=eps,
                        mem_cost=step.cost,
                        water_energy=water_energy(water, dt),
                    ))
                    if it_span is not None:
                        it_span.set_attribute("eps", eps)
                logger.debug(f"ADMM k={k}: C_E {step.cost:.6f}, eps {eps:.3e}, |lambda| {records[-1].lambda_norm:.3e}")

                stop = _stop_reason(config, records)
                if stop is not None:
                    reason = stop
                    break
            peer.finish(k, reason)
            restored, cost = restore_feasibility(mem_scenario, water, solver_config)
        except AdmmAborted:
            raise
        except MwenError as e:
            logger.error(f"ADMM aborted at iteration {k}: {e}")
            try:
                peer.finish(k, "aborted")
            except MwenError:
                pass
            raise AdmmAborted(f"ADMM aborted at iteration {k}: {e}", records, cause=e) from e

        if run_span is not None:
            run_span.set_attribute("iterations", len(records))
            run_span.set_attribute("stop_reason", reason)

    logger.info(
        f"ADMM stopped after {len(records)} iterations ({reason}): eps {records[-1].eps:.3e}, "
        f"restored cost {cost:.6f} $"
    )
    return DecentralizedSolution(
        mem=restored,
        water=peer.dispatch,
        restored_cost=cost,
        last_mem_cost=records[-1].mem_cost,
        iterations=records,
        stop_reason=reason,
    )
