"""Exception taxonomy shared across the package.

Every error raised on purpose derives from TscaleError so callers can
catch one base class.  The CLI maps ConfigError to exit code 2 and the
domain / regressivity pair to exit code 3.
"""

from __future__ import annotations


class TscaleError(Exception):
    """Base class for all errors raised deliberately by this package."""


class ConfigError(TscaleError):
    """Malformed or inconsistent user-supplied configuration."""


class DomainError(TscaleError):
    """Operation asked for points, indices, or shapes the scale cannot supply."""


class ScaleMismatchError(DomainError):
    """Two grid functions that must share a scale do not."""


class RegressivityError(DomainError):
    """A coefficient fails the 1 + mu*p regressivity requirement.

    worst_index is the index of the offending factor when known.
    """

    def __init__(self, message: str, worst_index: int | None = None,
                 worst_factor: float | None = None):
        super().__init__(message)
        self.worst_index = worst_index
        self.worst_factor = worst_factor
