"""Exception hierarchy shared by every module."""


class OddsProbError(Exception):
    """Base class for package errors."""


class OddsDomainError(OddsProbError, ValueError):
    """Invalid odds, shapes or arguments."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class UnsupportedMarketError(OddsDomainError):
    """The method's derivation does not cover this market (e.g. t != 1)."""


class ConvergenceError(OddsProbError, ArithmeticError):
    """An iterative solver stopped without converging."""

    def __init__(self, message: str, last_value: float):
        super().__init__(message)
        self.last_value = last_value


class FitError(OddsProbError, ArithmeticError):
    """Model fitting failed (non-finite likelihood, divergence)."""

    def __init__(self, message: str, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class DataFormatError(OddsProbError, ValueError):
    """Malformed input file."""


class ConfigError(OddsProbError, ValueError):
    """Inconsistent run configuration (empty method list, bad protocol)."""
