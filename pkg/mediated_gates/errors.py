"""
Exception types shared by the services and the command layer.

Services raise the ValueError/KeyError subclasses below; commands translate
them into ``CommandError`` which carries the process exit code.
"""
from __future__ import annotations

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4


class MediatedGateError(Exception):
    """Base class for library errors."""


class DimensionError(MediatedGateError, ValueError):
    """Shapes do not match or are not square / not a power of two."""


class DomainError(MediatedGateError, ValueError):
    """Argument outside the domain of an operation."""


class NotUnitaryError(MediatedGateError, ValueError):
    """Matrix fails the unitarity check at the requested tolerance."""


class LookupFailure(MediatedGateError, KeyError):
    """Unknown label, tag, target name or figure id."""

    def __str__(self) -> str:
        # KeyError repr-quotes its argument; keep messages readable
        return str(self.args[0]) if self.args else ""


class CommandError(Exception):
    """Raised by commands; main.py maps it to an exit code."""

    def __init__(self, exit_code: int, detail: str):
        super().__init__(detail)
        self.exit_code = exit_code
        self.detail = detail
