"""Exception types raised across the package."""


class QcorrError(Exception):
    """Base class for all package errors."""


class NotClifford(QcorrError, ValueError):
    pass


class InvalidAngle(QcorrError, ValueError):
    pass


class UnsupportedGate(QcorrError, ValueError):
    pass


class DurationMismatch(QcorrError, ValueError):
    pass


class TraceTooShort(QcorrError, ValueError):
    pass


class LengthMismatch(QcorrError, ValueError):
    pass


class SeriesTooShort(QcorrError, ValueError):
    pass


class NoCrossing(QcorrError, ValueError):
    pass


class InvalidArgs(QcorrError, ValueError):
    pass


class IncompleteGrid(QcorrError, ValueError):
    pass


class DivideByZero(QcorrError, ZeroDivisionError):
    pass


class NonConvergence(QcorrError, RuntimeError):
    pass


class InvalidRSS(QcorrError, ValueError):
    pass


class ParseError(QcorrError, ValueError):
    pass


class ValidationError(QcorrError, ValueError):
    """Config validation failure; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
