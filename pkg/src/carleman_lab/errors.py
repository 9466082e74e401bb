"""Exception hierarchy shared by all modules."""


class CarlemanLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CarlemanLabError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ResourceError(CarlemanLabError):
    """A problem size exceeds the configured cap."""


class InstabilityError(CarlemanLabError, ArithmeticError):
    """A state component exceeded the overflow threshold."""


class NormError(DomainError):
    """Target matrix is too large in spectral norm for the requested scale."""


class DegenerateOutputError(CarlemanLabError, ArithmeticError):
    """Post-selection annihilated the state."""


class ConfigError(CarlemanLabError):
    """Malformed or invalid run configuration."""
