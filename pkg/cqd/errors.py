"""
Exception hierarchy for the CQD toolkit.

Every operation that can fail raises one of these; the CLI maps them onto
exit codes.
"""

from typing import Any, Dict, Optional


class CQDError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if not self.details:
            return self.message
        extras = ", ".join(f"{key}={value}" for key, value in sorted(self.details.items()))
        return f"{self.message} ({extras})"


class DomainError(CQDError, ValueError):
    """Input outside the physical or mathematical domain of an operation."""


class NumericError(CQDError, ArithmeticError):
    """Integration, quadrature or fit failed to converge."""


class DataError(CQDError, ValueError):
    """Malformed or out-of-range input data."""

    def __init__(self, message: str, line: Optional[int] = None,
                 details: Optional[Dict[str, Any]] = None):
        details = dict(details or {})
        if line is not None:
            details["line"] = line
        super().__init__(message, details)
        self.line = line


class ConfigError(CQDError, ValueError):
    """Invalid run configuration (unknown keys, bad values, unreadable file)."""
