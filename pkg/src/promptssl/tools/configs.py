"""
Configuration tool: validate a run config without running it.
"""
from typing import List, Optional

import yaml

from promptssl.common import ConfigError
from promptssl.config import config_hash, resolve_config


def _validate_config_impl(config_yaml: str,
                          overrides: Optional[List[str]] = None) -> str:
    try:
        data = yaml.safe_load(config_yaml) if config_yaml.strip() else {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse YAML: {e}") from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("The configuration must be a mapping.")
    config = resolve_config(data, overrides or [])
    return "\n".join([
        "Configuration is valid.",
        f"Hash: {config_hash(config)}",
        f"Protocol: {config.data.protocol} on {config.data.source}",
        f"Context length: {config.rho.context_length}, "
        f"init: {config.rho.init}",
    ])


def register_tools(mcp) -> None:
    """
    Register configuration tools with the MCP server.

    Args:
        mcp: The FastMCP server instance
    """

    @mcp.tool()
    def validate_config(config_yaml: str,
                        overrides: Optional[List[str]] = None) -> str:
        """
        Validates a run configuration and reports its hash.

        Args:
            config_yaml: YAML text of the configuration
            overrides: Optional ``key.path=value`` overrides

        Returns:
            The config hash, or every unknown and invalid key
        """
        try:
            return _validate_config_impl(config_yaml, overrides)
        except ConfigError as e:
            return f"Error: {str(e)}"
