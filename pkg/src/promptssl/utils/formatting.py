"""
Markdown formatting helpers used by the CLI and the MCP tools.
"""
from typing import Any, Iterable, Sequence


def format_value(value: Any) -> str:
    """Format a table cell; floats get two decimals."""
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def format_table(headers: Sequence[str],
                 rows: Iterable[Sequence[Any]]) -> str:
    """Format data as a markdown table."""
    result = []
    result.append("| " + " | ".join(headers) + " |")
    result.append("| " + " | ".join(["----"] * len(headers)) + " |")
    for row in rows:
        result.append(
            "| " + " | ".join(format_value(cell) for cell in row) + " |")
    return "\n".join(result)
