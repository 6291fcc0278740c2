"""
Error types and standardized error reporting.

Every failure raised by the library is a GridstoreError carrying a
machine-readable code, so the CLI can render a single-line diagnostic.
"""

import logging
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)


class ErrorCode(str, Enum):
    """Standardized error codes."""
    # Model file / model errors
    PARSE_ERROR = "PARSE_ERROR"
    VALIDATION_ERROR = "VALIDATION_ERROR"
    UNKNOWN_BUS = "UNKNOWN_BUS"
    NOT_A_GENERATOR = "NOT_A_GENERATOR"

    # Program / solver errors
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    NOT_OPTIMAL = "NOT_OPTIMAL"

    # Analytic / construction errors
    NOT_SINGLE_CONNECTION = "NOT_SINGLE_CONNECTION"
    PRECONDITION_FAILED = "PRECONDITION_FAILED"
    HYPOTHESIS_NOT_MET = "HYPOTHESIS_NOT_MET"
    ASSUMPTION_VIOLATED = "ASSUMPTION_VIOLATED"
    PURIFICATION_STALLED = "PURIFICATION_STALLED"
    TOPOLOGY_UNSUPPORTED = "TOPOLOGY_UNSUPPORTED"

    # Front door
    USAGE_ERROR = "USAGE_ERROR"
    VERIFICATION_FAILED = "VERIFICATION_FAILED"


class ErrorResponse(BaseModel):
    """Standardized error payload."""
    success: bool = Field(default=False, description="Always False for error responses")
    error_code: ErrorCode = Field(..., description="Machine-readable error code")
    message: str = Field(..., description="User-friendly error message")
    detail: Optional[str] = Field(None, description="Additional technical details")
    suggestions: Optional[List[str]] = Field(None, description="Suggested actions to resolve error")

    def to_line(self) -> str:
        """Render as a single diagnostic line."""
        line = f"error [{self.error_code.value}]: {self.message}"
        if self.detail:
            line += f" ({self.detail})"
        return line


def create_error_response(
    error_code: ErrorCode,
    message: str,
    detail: Optional[str] = None,
    suggestions: Optional[List[str]] = None,
) -> ErrorResponse:
    """
    Create a standardized error response.

    Args:
        error_code: Machine-readable error code
        message: User-friendly error message
        detail: Optional technical details
        suggestions: Optional list of suggested actions

    Returns:
        Standardized ErrorResponse
    """
    return ErrorResponse(
        error_code=error_code,
        message=message,
        detail=detail,
        suggestions=suggestions,
    )


class GridstoreError(Exception):
    """Base class for all library errors."""

    default_code = ErrorCode.VALIDATION_ERROR

    def __init__(
        self,
        message: str,
        error_code: Optional[ErrorCode] = None,
        detail: Optional[str] = None,
        suggestions: Optional[List[str]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.default_code
        self.detail = detail
        self.suggestions = suggestions or []

    def to_response(self) -> ErrorResponse:
        return create_error_response(
            self.error_code, self.message, self.detail, self.suggestions or None
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return self.to_response().model_dump(mode="json")


class ModelParseError(GridstoreError):
    """Network file is not syntactically or structurally valid."""

    default_code = ErrorCode.PARSE_ERROR

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        detail: Optional[str] = None,
    ):
        if line is not None:
            message = f"{message} at line {line}, column {column}"
        super().__init__(message, detail=detail)
        self.line = line
        self.column = column


class ModelValidationError(GridstoreError):
    """Model violates one or more structural invariants."""

    default_code = ErrorCode.VALIDATION_ERROR

    def __init__(self, message: str, report: Any = None, **kwargs):
        super().__init__(message, **kwargs)
        self.report = report


class ProgramBuildError(GridstoreError):
    """Problem specification cannot be turned into a program."""

    default_code = ErrorCode.UNKNOWN_BUS


class DimensionMismatchError(GridstoreError):
    default_code = ErrorCode.DIMENSION_MISMATCH


class SolverError(GridstoreError):
    default_code = ErrorCode.NOT_OPTIMAL


class AnalyticError(GridstoreError):
    """Closed-form operation called outside its assumptions."""

    default_code = ErrorCode.ASSUMPTION_VIOLATED


class HypothesisNotMet(AnalyticError):
    default_code = ErrorCode.HYPOTHESIS_NOT_MET


class PurificationError(GridstoreError):
    default_code = ErrorCode.PURIFICATION_STALLED


class TransferError(GridstoreError):
    default_code = ErrorCode.PRECONDITION_FAILED


class UsageError(GridstoreError):
    default_code = ErrorCode.USAGE_ERROR


class VerificationError(GridstoreError):
    default_code = ErrorCode.VERIFICATION_FAILED
