"""
Exception hierarchy shared by the computation services.

Every error carries a machine-readable ``error_type`` so the CLI and the
HTTP layer can report failures without parsing messages.
"""

from typing import Any


class HurwitzFormsError(Exception):
    """Base exception for all computation errors."""

    def __init__(self, error_type: str, message: str, **context: Any):
        super().__init__(message)
        self.error_type = error_type
        self.message = message
        self.context = context

    def to_dict(self) -> dict[str, Any]:
        """Export error as a JSON-friendly dictionary."""
        return {
            "error": self.error_type,
            "message": self.message,
            "context": {key: str(value) for key, value in self.context.items()},
        }


class RingError(HurwitzFormsError):
    """Invalid ring descriptor, mixed rings, non-units, non-exact division."""


class LinalgError(HurwitzFormsError):
    """Shape mismatches and unsupported rings in matrix algorithms."""


class TupleError(HurwitzFormsError):
    """Malformed words, tuples and move scripts."""


class RepresentationError(HurwitzFormsError):
    """Schema violations and failed representation checks."""


class InvariantError(HurwitzFormsError):
    """Failures while building the kernel, the quotient or the pairing."""


class MeyerError(HurwitzFormsError):
    """Non-symplectic input to the Meyer cocycle."""
