"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 2 (bad arguments or
configuration), DataError -> 3 (malformed or unusable input data),
ConvergenceError -> 4 (numerical failure).
"""


class ValidationError(ValueError):
    """An argument or configuration violates a documented invariant."""


class DataError(ValueError):
    """Input data is malformed, inconsistent, or numerically unusable."""


class ConvergenceError(RuntimeError):
    """An iterative numerical procedure failed to converge."""
