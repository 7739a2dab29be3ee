from __future__ import annotations


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class HyprecError(Exception):
    """Base of every error the pipeline reports to the command line."""

    exit_code = EXIT_NUMERICAL


class UsageError(HyprecError):
    exit_code = EXIT_USAGE


class DataError(HyprecError):
    exit_code = EXIT_DATA


class NumericalError(HyprecError):
    exit_code = EXIT_NUMERICAL


class DomainError(HyprecError, ValueError):
    """A geometry pre-condition failed (outside the ball, off the sheet, curvature mismatch)."""

    exit_code = EXIT_NUMERICAL


class UnsupportedOpError(NumericalError):
    pass


class TapeStateError(NumericalError):
    pass
