"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An input is outside the domain of the operation."""


class InvalidStateError(RuntimeError):
    """A result object is empty or degenerate for the requested quantity."""


class NumericalInstabilityError(ArithmeticError):
    """Time stepping produced non-finite values."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite field values at time step {step}")


class DegenerateDenominatorError(InvalidStateError):
    """A normalizing integral vanished."""


class OptimizationFailedError(RuntimeError):
    """No optimizer start produced a finite objective value."""


class SweepConflictError(RuntimeError):
    """A sweep file on disk was produced from a different sweep spec."""


class SweepParseError(ValueError):
    """A sweep file could not be parsed."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")
