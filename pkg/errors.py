"""Exceptions raised by cutofflab

Each class carries the exit code used by the command line and the HTTP
status used by the JSON API, so both front-ends translate errors the
same way
"""


class CutoffLabError(Exception):
    exit_code = 1
    http_status = 500


class DomainError(CutoffLabError, ValueError):
    """An argument outside the domain of an operation"""

    exit_code = 2
    http_status = 400


class ConfigError(CutoffLabError):
    """An experiment config that fails to load or validate"""

    exit_code = 2
    http_status = 400


class CapacityError(CutoffLabError):
    """An enumeration that would exceed the configured cap"""

    exit_code = 3
    http_status = 413

    def __init__(self, message: str, requested: int | None = None, cap: int | None = None):
        super().__init__(message)
        self.requested = requested
        self.cap = cap


class OracleMismatchError(CutoffLabError):
    """A closed form disagreeing with its brute-force oracle"""

    exit_code = 4
    http_status = 500


class LowerBoundRefused(DomainError):
    """The precondition of a lower-bound operation does not hold"""
