"""
The two ADMM agents over a channel.

Per iteration (microgrid-first order):

    MEM -> MWM  coupling_vector   P_E
    MWM -> MEM  coupling_vector   P_W
    MEM -> MWM  objective_scalar  C_E

and a final ``stop_signal`` from the microgrid side. Water-first order swaps
the first message's meaning: the vector sent is the previous P_E.
"""

import logging
from typing import List, Mapping, Optional, Sequence, Union

from pydantic import BaseModel

from mwen.admm import AdmmConfig, DecentralizedSolution, WaterAgent, WaterPeer, run_admm
from mwen.core.config import SolverConfig
from mwen.core.errors import AdmmAborted, MwenError, ProtocolError
from mwen.otel.telemetry import span
from mwen.pwl import PwlCurve
from mwen.scenario.models import Scenario
from .channel import SocketChannel
from .protocol import (
    COUPLING_VECTOR,
    OBJECTIVE_SCALAR,
    ROLE_MEM,
    ROLE_MWM,
    STOP_SIGNAL,
    AdmmMessage,
    make_message,
)

logger = logging.getLogger(__name__)

STOP_CODES = {"eps_threshold": 1.0, "objective_based": 2.0, "max_iters": 3.0, "aborted": -1.0}


def _expect(message: AdmmMessage, kind: str, role: str, k: int) -> AdmmMessage:
    if message.kind != kind or message.role != role or message.iter != k:
        raise ProtocolError(
            f"Expected {kind} from {role} for iteration {k}, got {message.kind} from {message.role} "
            f"for iteration {message.iter}"
        )
    return message


class RemotePeer(WaterPeer):
    """Microgrid-side proxy for a water agent at the other end of a channel"""

    def __init__(self, channel: SocketChannel):
        self.channel = channel

    def initial_profile(self) -> List[float]:
        return list(_expect(self.channel.recv(), COUPLING_VECTOR, ROLE_MWM, 0).data)

    def solve(self, k: int, target: Sequence[float]) -> List[float]:
        self.channel.send(make_message(k, ROLE_MEM, COUPLING_VECTOR, target))
        return list(_expect(self.channel.recv(), COUPLING_VECTOR, ROLE_MWM, k).data)

    def observe(self, k: int, mem_cost: float) -> None:
        self.channel.send(make_message(k, ROLE_MEM, OBJECTIVE_SCALAR, [mem_cost]))

    def finish(self, k: int, reason: str) -> None:
        self.channel.send(make_message(k, ROLE_MEM, STOP_SIGNAL, [STOP_CODES.get(reason, -1.0)]))


class WaterAck(BaseModel):
    """What the water agent reports when the microgrid side stops the run"""

    iterations: int
    stop_code: float
    energy_kwh: float
    water_profile: List[float]


def serve_water_agent(channel: SocketChannel, agent: WaterAgent) -> WaterAck:
    """
    Answer microgrid requests until a stop signal arrives

    Raises:
        ProtocolError: unexpected message, disconnect or timeout
    """
    channel.send(make_message(0, ROLE_MWM, COUPLING_VECTOR, agent.initial_profile()))
    k = 0
    while True:
        message = channel.recv()
        if message.role != ROLE_MEM:
            raise ProtocolError(f"Water agent received a message from {message.role}")
        if message.kind == COUPLING_VECTOR:
            k = message.iter
            channel.send(make_message(k, ROLE_MWM, COUPLING_VECTOR, agent.solve(k, message.data)))
        elif message.kind == OBJECTIVE_SCALAR:
            agent.observe(message.iter, message.data[0])
        else:
            stop_code = message.data[0] if message.data else -1.0
            logger.info(f"Water agent stopped by microgrid after {k} iterations (code {stop_code})")
            energy = agent.dispatch.energy_kwh if agent.dispatch is not None else 0.0
            return WaterAck(iterations=k, stop_code=stop_code, energy_kwh=energy, water_profile=list(agent.own))


def run_agent(
    role: str,
    endpoint: Union[str, SocketChannel],
    scenario: Scenario,
    config: AdmmConfig,
    curves: Optional[Mapping[str, PwlCurve]] = None,
    solver_config: Optional[SolverConfig] = None,
) -> Union[DecentralizedSolution, WaterAck]:
    """
    Run one side of a two-process ADMM run

    The microgrid agent (``mem``) listens on ``endpoint`` and drives the loop;
    the water agent (``mwm``) connects to it and answers. Each side should be
    given only its own scenario slice; both need ``config.coupling_bounds``.

    Args:
        role: ``mem`` or ``mwm``
        endpoint: ``host:port``, or an already connected channel
        scenario: This agent's scenario slice
        config: Shared loop settings (rho, horizon, stop rule, bounds)
        curves: Pump curves (water agent only)
        solver_config: Local solver settings

    Returns:
        DecentralizedSolution on the microgrid side, WaterAck on the water side
    """
    role = role.lower()
    if role not in ("mem", "mwm"):
        raise ProtocolError(f"Unknown agent role '{role}'")
    if config.coupling_bounds is None:
        raise ProtocolError("Agent runs need coupling_bounds in the shared config")

    if isinstance(endpoint, SocketChannel):
        channel = endpoint
    elif role == "mem":
        channel = SocketChannel.listen(endpoint, timeout=config.timeout)
    else:
        channel = SocketChannel.connect(endpoint, timeout=config.timeout)
    channel.horizon = scenario.horizon

    with span("transport.agent", role=role), channel:
        if role == "mem":
            return run_admm(scenario, None, config, solver_config, peer=RemotePeer(channel))
        if curves is None:
            raise ProtocolError("The water agent needs pump curves")
        agent = WaterAgent(scenario.mwm_view(), curves, config, config.coupling_bounds, solver_config)
        try:
            return serve_water_agent(channel, agent)
        except MwenError as e:
            logger.error(f"Water agent aborted: {e}")
            raise AdmmAborted(f"Water agent aborted: {e}", cause=e) from e
