"""Exception types shared across the package."""


class RelaxError(Exception):
    """Base class for all package errors."""

    kind = "error"


class InvalidInputError(RelaxError, ValueError):
    kind = "invalid_input"


class InvalidParameterError(RelaxError, ValueError):
    kind = "invalid_parameter"


class DivergenceError(RelaxError, ArithmeticError):
    kind = "divergence"


class SingularityError(RelaxError, ArithmeticError):
    kind = "singularity"


class ShootingError(RelaxError, RuntimeError):
    kind = "shooting"


class DomainError(RelaxError, ValueError):
    kind = "domain"


class ConfigError(RelaxError, ValueError):
    kind = "config"

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
