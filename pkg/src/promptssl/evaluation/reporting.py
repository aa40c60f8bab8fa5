"""
Result files: versioned JSON plus a flat CSV, and console tables.
"""
import csv
import json
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

from promptssl.common import OutputExistsError
from promptssl.evaluation.common import EvalResult
from promptssl.utils.formatting import format_table

RESULTS_FORMAT = "promptssl-results"
RESULTS_VERSION = 1

CSV_COLUMNS = ("protocol", "dataset", "top1", "base_acc", "new_acc",
               "harmonic_mean", "num_samples", "seeds")


def results_payload(
    results: Sequence[EvalResult],
    config_hash: str,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    payload = {
        "format": RESULTS_FORMAT,
        "version": RESULTS_VERSION,
        "config_hash": config_hash,
        "results": [r.to_dict() for r in results],
    }
    payload.update(extra or {})
    return payload


def write_results(
    out_dir: Path,
    results: Sequence[EvalResult],
    config_hash: str,
    extra: Optional[Dict[str, Any]] = None,
    overwrite: bool = False,
) -> Tuple[Path, Path]:
    """
    Write ``results.json`` and ``results.csv`` into a directory.

    Raises:
        OutputExistsError: If either file exists and overwrite is False
    """
    out_dir = Path(out_dir)
    json_path = out_dir / "results.json"
    csv_path = out_dir / "results.csv"
    if not overwrite:
        for path in (json_path, csv_path):
            if path.exists():
                raise OutputExistsError(
                    f"{path} exists; pass --overwrite to replace it")
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path.write_text(json.dumps(
        results_payload(results, config_hash, extra), indent=2,
        sort_keys=True))
    with csv_path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for result in results:
            writer.writerow([
                result.protocol,
                result.dataset,
                result.top1,
                result.base_acc,
                result.new_acc,
                result.harmonic_mean,
                result.num_samples,
                len(result.per_seed),
            ])
    return json_path, csv_path


def format_results_table(results: Sequence[EvalResult]) -> str:
    """Markdown table; base/new/HM columns for base-to-new results."""
    if any(r.harmonic_mean is not None for r in results):
        return format_table(
            ["Dataset", "Base", "New", "HM"],
            [[r.dataset, r.base_acc, r.new_acc, r.harmonic_mean]
             for r in results])
    return format_table(
        ["Dataset", "Top-1"], [[r.dataset, r.top1] for r in results])
