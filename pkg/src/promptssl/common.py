"""
Shared exception types for promptssl.

Every capability package defines its own error in its ``common.py``;
they all derive from ``PromptSSLError`` so callers can catch the family.
"""


class PromptSSLError(Exception):
    """Base class for every error raised by promptssl."""
    pass


class ConfigError(PromptSSLError):
    """Exception raised for invalid or inconsistent configuration."""
    pass


class OutputExistsError(PromptSSLError):
    """Exception raised instead of overwriting existing run output."""
    pass
