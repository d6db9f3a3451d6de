"""Shared exception types."""


class ContractError(ValueError):
    """A caller violated an operation's precondition (shapes, ranges, indices)."""


class ConfigError(ValueError):
    """A configuration value is missing, unknown, or out of range."""
