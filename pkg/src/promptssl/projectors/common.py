"""
Common types for the vision projector.
"""
from promptssl.common import PromptSSLError


class ProjectorError(PromptSSLError):
    """Exception raised for projector input mismatches."""
    pass
