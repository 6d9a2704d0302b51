"""
Agent wire format.

Frame: 4-byte big-endian body length, then a UTF-8 JSON object with the
fields ``v``, ``iter``, ``role``, ``kind``, ``data`` and ``crc32``. The
checksum covers the compact JSON of the other five fields in that order.
"""

import json
import logging
import struct
import zlib
from typing import Any, Dict, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from mwen.core.errors import ChecksumError, ProtocolError, TruncatedFrameError, VersionMismatchError

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
HEADER = struct.Struct("!I")
MAX_FRAME_BYTES = 16 * 1024 * 1024

COUPLING_VECTOR = "coupling_vector"
OBJECTIVE_SCALAR = "objective_scalar"
STOP_SIGNAL = "stop_signal"

ROLE_MEM = "MEM"
ROLE_MWM = "MWM"


class AdmmMessage(BaseModel):
    """One protocol message; ``data`` is a length-T vector or a single scalar"""

    model_config = ConfigDict(frozen=True)

    v: int = PROTOCOL_VERSION
    iter: int
    role: Literal["MEM", "MWM"]
    kind: Literal["coupling_vector", "objective_scalar", "stop_signal"]
    data: Tuple[float, ...] = ()
    crc32: Optional[int] = None

    @model_validator(mode="after")
    def _check_payload(self) -> "AdmmMessage":
        if self.kind == COUPLING_VECTOR and not self.data:
            raise ValueError("coupling_vector needs a non-empty vector")
        if self.kind == OBJECTIVE_SCALAR and len(self.data) != 1:
            raise ValueError(f"objective_scalar carries exactly one value, got {len(self.data)}")
        return self

    def fields(self) -> Dict[str, Any]:
        return {"v": self.v, "iter": self.iter, "role": self.role, "kind": self.kind, "data": list(self.data)}

    def checksum(self) -> int:
        return zlib.crc32(_compact(self.fields())) & 0xFFFFFFFF


def _compact(obj: Dict[str, Any]) -> bytes:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False).encode("utf-8")


def make_message(iter: int, role: str, kind: str, data: Sequence[float] = ()) -> AdmmMessage:
    try:
        return AdmmMessage(iter=iter, role=role, kind=kind, data=tuple(float(x) for x in data))
    except ValidationError as e:
        raise ProtocolError(f"Invalid {kind} message: {e.errors()[0]['msg']}") from e


def encode_frame(message: AdmmMessage, horizon: Optional[int] = None) -> bytes:
    """
    Serialize a message into a length-prefixed frame

    Raises:
        ProtocolError: empty vector, or vector length different from ``horizon``
    """
    if message.kind == COUPLING_VECTOR:
        if not message.data:
            raise ProtocolError("Refusing to encode an empty coupling vector")
        if horizon is not None and len(message.data) != horizon:
            raise ProtocolError(f"Coupling vector has {len(message.data)} entries, horizon is {horizon}")
    body_fields = message.fields()
    body_fields["crc32"] = message.checksum()
    try:
        body = _compact(body_fields)
    except ValueError as e:
        raise ProtocolError(f"Message is not JSON-encodable: {e}") from e
    if len(body) > MAX_FRAME_BYTES:
        raise ProtocolError(f"Frame of {len(body)} bytes exceeds {MAX_FRAME_BYTES}")
    return HEADER.pack(len(body)) + body


def frame_length(header: bytes) -> int:
    if len(header) < HEADER.size:
        raise TruncatedFrameError(f"Frame header has {len(header)} of {HEADER.size} bytes")
    (length,) = HEADER.unpack(header[:HEADER.size])
    if length > MAX_FRAME_BYTES:
        raise ProtocolError(f"Announced frame length {length} exceeds {MAX_FRAME_BYTES}")
    return length


def decode_frame(frame: bytes, horizon: Optional[int] = None) -> AdmmMessage:
    """
    Parse and verify one complete frame

    Raises:
        TruncatedFrameError: body shorter than its length prefix
        VersionMismatchError: peer speaks another protocol version
        ChecksumError: body does not match its crc32
        ProtocolError: malformed body, trailing bytes, wrong vector length
    """
    length = frame_length(frame)
    body = frame[HEADER.size:]
    if len(body) < length:
        raise TruncatedFrameError(f"Frame announces {length} bytes but carries {len(body)}")
    if len(body) > length:
        raise ProtocolError(f"Frame has {len(body) - length} trailing bytes")

    try:
        raw = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ProtocolError(f"Malformed frame body: {e}") from e
    if not isinstance(raw, dict):
        raise ProtocolError("Frame body is not a JSON object")
    if raw.get("v") != PROTOCOL_VERSION:
        raise VersionMismatchError(f"Peer protocol version {raw.get('v')!r}, expected {PROTOCOL_VERSION}")

    try:
        message = AdmmMessage.model_validate(raw)
    except ValidationError as e:
        raise ProtocolError(f"Invalid message: {e.errors()[0]['msg']}") from e
    if message.crc32 != message.checksum():
        raise ChecksumError(f"crc32 {message.crc32} does not match payload ({message.checksum()})")
    if horizon is not None and message.kind == COUPLING_VECTOR and len(message.data) != horizon:
        raise ProtocolError(f"Coupling vector has {len(message.data)} entries, horizon is {horizon}")
    return message
