"""
Run tools.

This module provides MCP tools for browsing training runs and their
evaluation results.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional

from promptssl.evaluation.common import EvalResult
from promptssl.evaluation.reporting import format_results_table
from promptssl.tools.common import (
    RunLookupError,
    get_runs_root,
    read_json,
    resolve_run,
)
from promptssl.utils.formatting import format_table


def _results(rows: List[Dict[str, Any]]) -> List[EvalResult]:
    return [EvalResult(**row) for row in rows]


def _format_run(name: str, manifest: Dict[str, Any]) -> str:
    """
    Format the headline of a run.

    Args:
        name: Run path relative to the runs root
        manifest: Parsed run manifest

    Returns:
        String with run details
    """
    config = manifest.get("config", {})
    data = config.get("data", {})
    formatted_info = [f"# Run: {name}"]
    formatted_info.append(f"Config hash: {manifest.get('config_hash')}")
    formatted_info.append(
        f"Protocol: {data.get('protocol')} on {data.get('source')}")
    seeds = manifest.get("seeds", [])
    formatted_info.append(f"Seeds: {', '.join(str(s) for s in seeds)}")
    mean = manifest.get("mean", [])
    if mean:
        formatted_info.append(format_results_table(_results(mean)))
    return "\n".join(formatted_info)


def _list_runs_impl(root: Path) -> str:
    """
    Implementation of run listing.

    Args:
        root: Runs root directory

    Returns:
        Formatted string with one section per run
    """
    root = Path(root)
    if not root.is_dir():
        return f"Runs root {root} does not exist."
    manifests = sorted(root.rglob("run.json"))
    if not manifests:
        return "No runs found."
    sections = []
    for path in manifests:
        name = str(path.parent.relative_to(root)) or "."
        try:
            sections.append(_format_run(name, read_json(path)))
        except RunLookupError as e:
            sections.append(f"# Run: {name}\nError: {e}")
    return "\n\n".join(sections)


def _get_run_summary_impl(root: Path, run: str) -> str:
    """
    Implementation of the run summary: headline plus the per-seed
    training curve.
    """
    path = resolve_run(root, run)
    manifest = read_json(path / "run.json")
    parts = [_format_run(run, manifest)]
    for entry in manifest.get("runs", []):
        epochs = entry.get("epochs", [])
        parts.append(f"## Seed {entry.get('seed')}")
        if not epochs:
            parts.append("No training epochs recorded.")
            continue
        parts.append(format_table(
            ["Epoch", "L_total", "L_con", "L_ce", "L_sem", "Train acc"],
            [[e["epoch"], e["l_total"], e["l_con"], e["l_ce"], e["l_sem"],
              e["train_accuracy"]] for e in epochs]))
    return "\n\n".join(parts)


def _get_eval_results_impl(root: Path, run: str,
                           seed: Optional[int] = None) -> str:
    """
    Implementation of evaluation-result retrieval.

    Args:
        root: Runs root directory
        run: Run path relative to the root
        seed: Show one seed instead of the mean

    Returns:
        Markdown results table
    """
    path = resolve_run(root, run)
    if seed is None:
        payload = read_json(path / "results.json")
        return (f"# Results: {run} (mean over seeds)\n"
                + format_results_table(_results(payload["results"])))
    manifest = read_json(path / "run.json")
    for entry in manifest.get("runs", []):
        if entry.get("seed") == seed:
            return (f"# Results: {run} (seed {seed})\n"
                    + format_results_table(_results(entry["results"])))
    return f"Seed {seed} not found in run '{run}'."


def register_tools(mcp, root: Optional[Path] = None) -> None:
    """
    Register run tools with the MCP server.

    Args:
        mcp: The FastMCP server instance
        root: Runs root; PROMPTSSL_RUNS_ROOT when None
    """

    @mcp.tool()
    def list_runs() -> str:
        """
        Lists the training runs stored under the runs root.

        Use this tool when you need to:
        - Get an overview of finished runs
        - Find run names for the other run tools
        - Compare headline accuracies across runs

        Returns:
            Markdown sections, one per run, with config hash, protocol,
            seeds and the seed-averaged results table
        """
        return _list_runs_impl(get_runs_root(root))

    @mcp.tool()
    def get_run_summary(run: str) -> str:
        """
        Summarises one run: configuration headline and the per-epoch
        losses and training accuracy of every seed.

        Args:
            run: Run directory relative to the runs root

        Returns:
            Markdown summary with one loss table per seed
        """
        try:
            return _get_run_summary_impl(get_runs_root(root), run)
        except RunLookupError as e:
            return f"Error: {str(e)}"

    @mcp.tool()
    def get_eval_results(run: str, seed: Optional[int] = None) -> str:
        """
        Shows the evaluation results of a run.

        Args:
            run: Run directory relative to the runs root
            seed: Optional seed; the mean over seeds when omitted

        Returns:
            Markdown table with top-1, or base/new/HM for base-to-new
        """
        try:
            return _get_eval_results_impl(get_runs_root(root), run, seed)
        except (RunLookupError, KeyError) as e:
            return f"Error: {str(e)}"
