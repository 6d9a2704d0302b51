"""
Exception hierarchy for mwen.

Each exception carries the CLI exit code it maps to so the command layer can
translate failures without inspecting messages.
"""

from typing import List, Optional


class MwenError(Exception):
    """Base class for all mwen failures"""

    exit_code = 1


class ScenarioValidationError(MwenError):
    """Raised when a scenario record violates one or more rules"""

    exit_code = 2

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        summary = "; ".join(self.errors[:5])
        if len(self.errors) > 5:
            summary += f"; ... ({len(self.errors) - 5} more)"
        super().__init__(f"Scenario validation failed: {summary}")


class ModelBuildError(MwenError):
    """Raised when a variable or constraint cannot be added to a model"""

    exit_code = 2


class InfeasibleError(MwenError):
    """Raised when a caller needs an optimum but the solver found none"""

    exit_code = 3

    def __init__(self, message: str, status: Optional[str] = None):
        self.status = status
        super().__init__(message)


class SolverLimitError(MwenError):
    """Raised when a node/iteration limit is hit without a usable incumbent"""

    exit_code = 4


class ExtractionError(MwenError):
    """Raised when a solved assignment fails a post-solve cross-check"""

    exit_code = 1

    def __init__(self, message: str, tag: Optional[str] = None):
        self.tag = tag
        super().__init__(f"{tag}: {message}" if tag else message)


class ReportIOError(MwenError):
    """Raised when a report or scenario file cannot be read or written"""

    exit_code = 5

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f"{message} ({path})" if path else message)


class ProtocolError(MwenError):
    """Base class for agent wire-protocol failures"""

    exit_code = 6


class TruncatedFrameError(ProtocolError):
    """Frame shorter than its length prefix announces"""


class VersionMismatchError(ProtocolError):
    """Peer speaks a different protocol version"""


class ChecksumError(ProtocolError):
    """Frame payload does not match its crc32"""


class AgentTimeoutError(ProtocolError):
    """No message arrived within the configured timeout"""


class AgentDisconnectedError(ProtocolError):
    """Peer closed the connection mid-run"""


class AdmmAborted(MwenError):
    """
    Raised when the ADMM loop cannot continue.

    The partial iteration log is kept on the exception so callers can persist
    it before exiting.
    """

    def __init__(self, message: str, iterations: Optional[list] = None, cause: Optional[Exception] = None):
        self.iterations = list(iterations or [])
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
        super().__init__(message)
