# MCP tools for inspecting runs
from pathlib import Path
from typing import Optional

from promptssl.tools import configs, metrics, prompts, runs


def register_all(mcp, runs_root: Optional[Path] = None):
    """
    Register all tools and prompts with the MCP server.

    Args:
        mcp: The FastMCP server instance
        runs_root: Directory to browse; PROMPTSSL_RUNS_ROOT when None
    """
    runs.register_tools(mcp, runs_root)
    metrics.register_tools(mcp)
    configs.register_tools(mcp)
    prompts.register_prompt(mcp)
