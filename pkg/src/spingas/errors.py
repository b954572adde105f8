"""Exception hierarchy. The CLI maps each category onto an exit code."""


class SpinGasError(Exception):
    exit_code = 1


class InvalidInputError(SpinGasError, ValueError):
    exit_code = 2


class ConfigError(SpinGasError, ValueError):
    exit_code = 2


class CapacityError(SpinGasError):
    exit_code = 3


class NumericalInvariantError(SpinGasError, ArithmeticError):
    exit_code = 4


class PSDViolationError(NumericalInvariantError):
    pass


class ConsistencyError(NumericalInvariantError):
    """Internal geometry check failed, e.g. a collision resolved off contact."""


class PackingError(SpinGasError):
    exit_code = 3


class StasisError(SpinGasError):
    """No future billiard event exists (all balls at rest)."""

    exit_code = 4
