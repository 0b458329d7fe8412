"""Exception types shared across the package."""


class TdseError(Exception):
    """Base class for package errors."""


class ConfigError(TdseError):
    """Invalid or inconsistent configuration / parameters."""


class NumericsError(TdseError):
    """A numerical guard tripped during solving (resonance, non-convergence)."""
