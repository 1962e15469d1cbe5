"""Exception types shared across the package."""


class GridError(ValueError):
    """Grid configuration cannot support the requested operation."""


class ResolutionError(ValueError):
    """An operation would move frequency content outside the resolved shells."""


class InversionError(RuntimeError):
    """Fixed-point inversion of a drift operator failed to contract."""


class ConfigError(ValueError):
    """A scenario configuration file violates the published schema."""
