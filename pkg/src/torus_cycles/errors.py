"""Exception types shared across the package (the CLI maps them to exit codes)."""


class OutOfRange(ValueError):
    """Radius (or the edge probability it came from) is outside (0, 1/2]."""


class NumericalFailure(ArithmeticError):
    """A series did not converge, or produced a value outside [0, 1]."""

    def __init__(self, message: str, q: int | None = None):
        super().__init__(message)
        self.q = q


class CapacityError(ValueError):
    """Input is beyond what an exact or exponential-cost routine accepts."""


class NoThreshold(ValueError):
    """The target expectation never reaches 1 on the admissible range."""
