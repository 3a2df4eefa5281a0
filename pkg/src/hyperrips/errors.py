"""Exception hierarchy shared by every module.

Each class maps onto one CLI exit code, so callers can catch the base
class and still report a machine-readable reason.
"""

from __future__ import annotations


class HyperRipsError(Exception):
    exit_code = 1

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "reason": str(self)}


class ValidationError(HyperRipsError):
    """A group spec (or other user input) is malformed."""

    exit_code = 1

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason

    def to_dict(self) -> dict:
        return {"error": "ValidationError", "field": self.field, "reason": self.reason}


class DomainError(HyperRipsError, ValueError):
    """An element or word does not belong to the group backend."""

    exit_code = 1


class OutOfRange(HyperRipsError):
    """A metric query escaped the finite window it was asked inside."""

    exit_code = 3


class ResourceExhausted(HyperRipsError):
    """A size, count or time guard was hit."""

    exit_code = 3

    def __init__(self, message: str, reached: int | None = None):
        super().__init__(message)
        self.reached = reached

    def to_dict(self) -> dict:
        d = super().to_dict()
        if self.reached is not None:
            d["reached"] = self.reached
        return d


class CertificateFailure(HyperRipsError):
    """A certified inequality evaluated to false."""

    exit_code = 2

    def __init__(self, name: str, message: str, step: int | None = None, data: dict | None = None):
        super().__init__(f"{name}: {message}")
        self.name = name
        self.step = step
        self.data = data or {}

    def to_dict(self) -> dict:
        return {
            "error": "CertificateFailure",
            "certificate": self.name,
            "step": self.step,
            "reason": str(self),
            "data": self.data,
        }
