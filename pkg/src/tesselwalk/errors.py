"""Exception hierarchy shared by every tesselwalk module."""


class TesselwalkError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGraph(TesselwalkError, ValueError):
    pass


class CoverMismatch(TesselwalkError, ValueError):
    pass


class EmptyMarkedSet(TesselwalkError, ValueError):
    pass


class Disconnected(TesselwalkError, ValueError):
    pass


class ZeroColumn(TesselwalkError, ValueError):
    pass


class SingularSystem(TesselwalkError, ArithmeticError):
    pass


class RIsOne(TesselwalkError, ValueError):
    pass


class SupportMismatch(TesselwalkError, ValueError):
    pass


class NotBalanced(TesselwalkError, ValueError):
    pass


class CompletionFailure(TesselwalkError, ArithmeticError):
    pass


class NotSymmetricUpToTolerance(TesselwalkError, ValueError):
    pass


class ConfigTooLarge(TesselwalkError, ValueError):
    pass


class UnknownFamily(TesselwalkError, ValueError):
    pass


class BadParams(TesselwalkError, ValueError):
    pass


class ParseError(TesselwalkError, ValueError):
    """Malformed input file; carries the 1-based line and column when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
