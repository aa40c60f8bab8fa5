"""
Common helpers for the read-only run-inspection tools.
"""
import json
from pathlib import Path
from typing import Any, Dict, Optional

from promptssl.common import PromptSSLError
from promptssl.config import get_settings


class RunLookupError(PromptSSLError):
    """Exception raised when a run cannot be located or read."""
    pass


def get_runs_root(root: Optional[Path] = None) -> Path:
    """The directory the tools browse, ``PROMPTSSL_RUNS_ROOT`` by default."""
    return Path(root) if root is not None else get_settings().runs_root


def resolve_run(root: Path, run: str) -> Path:
    """
    Resolve a run name to a directory inside the runs root.

    Raises:
        RunLookupError: If the run escapes the root or has no manifest
    """
    root = Path(root).resolve()
    path = (root / run).resolve()
    if path != root and root not in path.parents:
        raise RunLookupError(f"Run '{run}' is outside the runs root")
    if not (path / "run.json").is_file():
        raise RunLookupError(f"No run manifest found for '{run}'")
    return path


def read_json(path: Path) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise RunLookupError(f"Cannot read {path}: {e}") from e
