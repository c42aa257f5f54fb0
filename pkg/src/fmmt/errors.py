"""Exception hierarchy shared across the package."""


class FmmtError(Exception):
    """Base class for all package-specific errors."""


class DomainError(FmmtError, ValueError):
    """An argument is outside its mathematical domain (bad point, bad parameter)."""


class ConfigurationError(FmmtError, ValueError):
    """A configuration value violates a structural requirement (partition, resolution)."""


class DataError(FmmtError, ValueError):
    """A data file failed to parse or validate."""


class NumericalError(FmmtError, ArithmeticError):
    """A numerical procedure failed beyond recovery (factorization, degeneracy)."""
