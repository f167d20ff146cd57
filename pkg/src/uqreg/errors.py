"""Exception hierarchy shared by all uqreg modules."""


class UqregError(Exception):
    """Base class for every error raised by this package."""


class DomainError(UqregError, ValueError):
    """An argument lies outside the domain of the operation."""


class UsageError(UqregError, ValueError):
    """The call itself is malformed (e.g. mixing families)."""


class ConfigError(UsageError):
    """A configuration file or mapping could not be interpreted."""

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class ConstraintError(UqregError, ValueError):
    """A transformation would move probability mass outside the parameter space."""


class DivergingMomentError(UqregError, ArithmeticError):
    """A required moment of a second-order law is infinite or undefined."""


class IntegrationError(UqregError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate=float("nan"), abserr=float("nan")):
        super().__init__(f"{message} (best estimate {estimate!r}, error {abserr!r})")
        self.estimate = estimate
        self.abserr = abserr
