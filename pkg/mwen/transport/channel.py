"""
Blocking message channels over stream sockets.
"""

import logging
import socket
import time
from typing import Optional, Tuple

from mwen.core.errors import AgentDisconnectedError, AgentTimeoutError, ProtocolError
from .protocol import HEADER, AdmmMessage, decode_frame, encode_frame, frame_length

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.0


def parse_address(address: str) -> Tuple[str, int]:
    """'host:port' (host defaults to 127.0.0.1)"""
    host, sep, port = address.rpartition(":")
    if not sep or not port.isdigit():
        raise ProtocolError(f"Bad address '{address}', expected host:port")
    return host or "127.0.0.1", int(port)


class SocketChannel:
    """
    One connected peer; frames in, frames out

    ``inbound`` keeps a copy of every byte received when ``capture`` is set.
    """

    def __init__(self, sock: socket.socket, horizon: Optional[int] = None,
                 timeout: float = DEFAULT_TIMEOUT, capture: bool = False):
        self.sock = sock
        self.horizon = horizon
        self.timeout = timeout
        self.inbound: Optional[bytearray] = bytearray() if capture else None
        self.sent = 0
        self.received = 0

    @classmethod
    def listen(cls, address: str, timeout: float = DEFAULT_TIMEOUT, **kwargs) -> "SocketChannel":
        """Accept exactly one connection on ``address``"""
        host, port = parse_address(address)
        server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            server.bind((host, port))
            server.listen(1)
            server.settimeout(timeout)
            logger.info(f"Waiting for peer on {host}:{port}")
            try:
                conn, peer = server.accept()
            except socket.timeout as e:
                raise AgentTimeoutError(f"No peer connected to {host}:{port} within {timeout} s") from e
        finally:
            server.close()
        logger.info(f"Peer connected from {peer[0]}:{peer[1]}")
        return cls(conn, timeout=timeout, **kwargs)

    @classmethod
    def connect(cls, address: str, timeout: float = DEFAULT_TIMEOUT, **kwargs) -> "SocketChannel":
        """Connect to a listening peer, retrying until ``timeout`` elapses"""
        host, port = parse_address(address)
        deadline = time.monotonic() + timeout
        while True:
            try:
                conn = socket.create_connection((host, port), timeout=timeout)
                break
            except OSError as e:
                if time.monotonic() >= deadline:
                    raise AgentTimeoutError(f"Could not connect to {host}:{port}: {e}") from e
                time.sleep(0.1)
        logger.info(f"Connected to {host}:{port}")
        return cls(conn, timeout=timeout, **kwargs)

    def send(self, message: AdmmMessage) -> None:
        frame = encode_frame(message, self.horizon)
        try:
            self.sock.sendall(frame)
        except OSError as e:
            logger.error(f"Send failed: {e}")
            raise AgentDisconnectedError(f"Peer went away while sending: {e}") from e
        self.sent += 1

    def _recv_exact(self, count: int) -> bytes:
        chunks = []
        remaining = count
        while remaining:
            try:
                chunk = self.sock.recv(remaining)
            except socket.timeout as e:
                raise AgentTimeoutError(f"No message within {self.timeout} s") from e
            except OSError as e:
                raise AgentDisconnectedError(f"Connection lost: {e}") from e
            if not chunk:
                raise AgentDisconnectedError("Peer closed the connection")
            chunks.append(chunk)
            remaining -= len(chunk)
        data = b"".join(chunks)
        if self.inbound is not None:
            self.inbound.extend(data)
        return data

    def recv(self) -> AdmmMessage:
        self.sock.settimeout(self.timeout)
        header = self._recv_exact(HEADER.size)
        body = self._recv_exact(frame_length(header))
        self.received += 1
        return decode_frame(header + body, self.horizon)

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass

    def __enter__(self) -> "SocketChannel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def loopback_pair(horizon: Optional[int] = None, timeout: float = DEFAULT_TIMEOUT,
                  capture: bool = False) -> Tuple[SocketChannel, SocketChannel]:
    """Two connected in-process channels (microgrid end, water end)"""
    left, right = socket.socketpair()
    return (
        SocketChannel(left, horizon=horizon, timeout=timeout),
        SocketChannel(right, horizon=horizon, timeout=timeout, capture=capture),
    )
