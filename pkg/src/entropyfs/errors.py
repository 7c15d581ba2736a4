"""Exception types shared across the package."""


class ResolutionError(ValueError):
    """An interval or cell set is finer than the grid it is evaluated on."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateWeightError(ValueError):
    """A weight vanishes where a positive mass is required."""


class NumericError(RuntimeError):
    """An iterative routine failed to converge within its budget."""


class ConfigError(ValueError):
    """A config file or spec string could not be parsed or is inconsistent."""
