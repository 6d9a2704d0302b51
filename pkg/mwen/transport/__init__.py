"""
Two-process ADMM: frame codec, socket channels and the agent loops.
"""

from .protocol import (
    PROTOCOL_VERSION,
    AdmmMessage,
    make_message,
    encode_frame,
    decode_frame,
    COUPLING_VECTOR,
    OBJECTIVE_SCALAR,
    STOP_SIGNAL,
    ROLE_MEM,
    ROLE_MWM,
)
from .channel import SocketChannel, loopback_pair, parse_address
from .agent import RemotePeer, WaterAck, serve_water_agent, run_agent

__all__ = [
    'PROTOCOL_VERSION',
    'AdmmMessage',
    'make_message',
    'encode_frame',
    'decode_frame',
    'COUPLING_VECTOR',
    'OBJECTIVE_SCALAR',
    'STOP_SIGNAL',
    'ROLE_MEM',
    'ROLE_MWM',
    'SocketChannel',
    'loopback_pair',
    'parse_address',
    'RemotePeer',
    'WaterAck',
    'serve_water_agent',
    'run_agent',
]
