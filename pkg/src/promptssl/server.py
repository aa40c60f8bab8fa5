"""
Prompt SSL run-inspection server

A read-only MCP server over the runs root: run listings, training
curves, evaluation results, metric arithmetic and config validation.
"""
import argparse
from pathlib import Path
from typing import Optional

from mcp.server.fastmcp import FastMCP

from promptssl.tools import register_all

TRANSPORTS = ("stdio", "sse", "streamable-http")


def create_server(runs_root: Optional[Path] = None) -> FastMCP:
    server = FastMCP("Prompt SSL Runs")
    register_all(server, runs_root)
    return server


mcp = create_server()


def serve(transport: str = "stdio",
          runs_root: Optional[Path] = None) -> None:
    server = mcp if runs_root is None else create_server(runs_root)
    server.run(transport=transport)


def main():
    """Entry point for running the server on its own."""
    parser = argparse.ArgumentParser(
        description="Run the Prompt SSL run-inspection MCP server")
    parser.add_argument("--transport", choices=TRANSPORTS, default="stdio")
    parser.add_argument("--runs-root", type=Path, default=None)
    args = parser.parse_args()
    serve(args.transport, args.runs_root)


if __name__ == "__main__":
    main()
