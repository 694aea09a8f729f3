"""Shared exception types."""


class ConfigError(ValueError):
    """A configuration value or file is invalid; the message names the violation."""


class ProtocolError(ValueError):
    """A session wire message could not be decoded."""
