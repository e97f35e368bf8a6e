"""Exception types shared across the package.

The CLI maps these onto exit codes: ArgumentError -> 2,
ConvergenceError -> 3, InternalConsistencyError -> 4.
"""


class ArgumentError(ValueError):
    """An argument or configuration value is outside its valid range."""


class UndefinedValueError(ValueError):
    """The requested quantity is mathematically undefined at this point."""


class ConvergenceError(RuntimeError):
    """Fixed-point iteration did not converge within the iteration budget.

    Carries the last iterate and its diagnostics in ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InternalConsistencyError(RuntimeError):
    """A model invariant failed beyond its numerical tolerance."""
