"""
Error Types

Every failure the library raises on purpose derives from DriveStateError, which
knows the process exit code and a short machine-readable reason slug.
"""

from typing import Any, Optional

from app.enum.exit_codes import ExitCodes


class DriveStateError(Exception):
    """Base class for all expected failures."""

    exit_code = ExitCodes.FAILURE
    reason = "error"

    def __init__(self, message: str, reason: Optional[str] = None):
        super().__init__(message)
        if reason:
            self.reason = reason

    def to_payload(self) -> dict[str, Any]:
        return {"error": self.reason, "message": str(self)}


class ValidationError(DriveStateError):
    exit_code = ExitCodes.VALIDATION
    reason = "validation"


class ModelFormatError(ValidationError):
    reason = "model_format"


class UnknownDriverError(ValidationError):
    reason = "unknown_driver"


class DuplicateDriverError(ValidationError):
    reason = "duplicate_driver"


class GenerationError(ValidationError):
    reason = "generation"


class NumericalError(DriveStateError):
    exit_code = ExitCodes.NUMERICAL
    reason = "numerical"


class TrainingError(NumericalError):
    """Raised when the outer loop aborts; keeps the trace recorded so far."""

    reason = "training"

    def __init__(self, message: str, trace: Any = None):
        super().__init__(message)
        self.trace = trace
