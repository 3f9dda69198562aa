"""Exception hierarchy shared across the package."""


class CubeError(Exception):
    """Base class for all errors raised by cubealg."""


class UnknownNameError(CubeError):
    """A dimension, level, member, or measure name did not resolve."""


class IrrationalValueError(CubeError):
    """A rational value was required but the operand carries radicals."""


class MalformedLabelError(CubeError):
    """A value used as a prime (product) label is not 1 or a unit radical."""


class EngineError(CubeError):
    """A transformation step or finalize request is ill-formed for the state."""


class GraphValidationError(CubeError):
    """A dimension schema or graph failed validation at load time."""


class FactError(CubeError):
    """A fact table row is malformed, duplicated, or references unknown names."""


class SnapshotError(CubeError):
    """A snapshot document cannot be restored (bad version or corrupt field)."""


class ParseError(CubeError):
    """A pipeline statement failed to parse."""

    def __init__(self, message: str, line: int = 1, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column
