"""Exception hierarchy shared by all modules."""


class TsfnError(Exception):
    """Base class for errors raised by this package."""


class InputError(TsfnError, ValueError):
    """Malformed or non-finite input data."""


class ConfigError(TsfnError, ValueError):
    """Invalid combination of configuration parameters."""


class NumericError(TsfnError, ArithmeticError):
    """An iterative routine failed to converge."""


class SingularHessianError(NumericError):
    """Hessian has an eigenvalue too close to zero for an untruncated inverse."""


class EmptySpectrumError(TsfnError, ValueError):
    """Truncation discarded every eigenvalue."""


class RankError(TsfnError, ValueError):
    """Requested rank exceeds the numerical rank of the matrix."""


class DivergenceError(TsfnError, ArithmeticError):
    """Iterate or objective became non-finite."""


class ParseError(InputError):
    """A delimited data file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ZeroGradientError(TsfnError, ValueError):
    """Gradient is exactly zero; the caller is already at a critical point."""
