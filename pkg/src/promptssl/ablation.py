"""
Ablation grids: named sets of config overrides, one run per cell.
"""
import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import yaml

from promptssl.common import ConfigError, OutputExistsError
from promptssl.config import Settings, load_config
from promptssl.evaluation import EvalResult
from promptssl.losses import LOSS_PRESETS
from promptssl.trainer import train_run
from promptssl.utils.formatting import format_table

logger = logging.getLogger(__name__)

Grid = Dict[str, List[str]]

SHOT_GRID = (1, 2, 4, 8, 16)
SUMMARY_FILES = ("ablation.json", "ablation.md")


def _loss_table() -> Grid:
    return {
        name: [f"loss.{key}={str(value).lower()}"
               for key, value in toggles.items()]
        for name, toggles in LOSS_PRESETS.items()
    }


def _context_lengths() -> Grid:
    return {f"m{m}": [f"rho.context_length={m}", "rho.init=random"]
            for m in range(1, 17)}


def _shots() -> Grid:
    grid = {f"shots_{s}": [f"train.shots={s}"] for s in SHOT_GRID}
    grid["shots_all"] = ["train.shots=null"]
    return grid


def _init() -> Grid:
    return {f"init_{mode}": [f"rho.init={mode}"]
            for mode in ("random", "none", "manual")}


PRESETS = {
    "loss_table": _loss_table,
    "context_lengths": _context_lengths,
    "shots": _shots,
    "init": _init,
}


def load_grid(spec: str) -> Grid:
    """
    Resolve a grid: a preset name or a YAML file.

    The file holds either ``cells: {name: [overrides]}`` or
    ``axes: {key.path: [values]}`` expanded as a cartesian product.

    Raises:
        ConfigError: If the grid cannot be read or has no cells
    """
    if spec in PRESETS:
        grid = PRESETS[spec]()
    else:
        try:
            data = yaml.safe_load(Path(spec).read_text()) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(
                f"'{spec}' is neither a preset ({', '.join(PRESETS)}) nor "
                f"a readable grid file: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Grid file {spec} must hold a mapping")
        grid = {}
        for name, overrides in (data.get("cells") or {}).items():
            grid[str(name)] = [str(o) for o in overrides or []]
        axes = data.get("axes") or {}
        if axes:
            keys = list(axes)
            for values in itertools.product(*(axes[k] for k in keys)):
                name = ",".join(f"{k}={v}" for k, v in zip(keys, values))
                grid[name] = [f"{k}={json.dumps(v)}"
                              for k, v in zip(keys, values)]
    if not grid:
        raise ConfigError(f"Grid '{spec}' has no cells")
    return grid


@dataclass
class AblationCell:
    name: str
    manifest_path: Path
    results: List[EvalResult]


def _headline(results: Sequence[EvalResult]) -> List[Optional[float]]:
    first = results[0]
    if first.harmonic_mean is not None:
        return [first.base_acc, first.new_acc, first.harmonic_mean]
    average = [r for r in results if r.dataset == "average"]
    return [(average or results)[0].top1]


def comparison_table(cells: Sequence[AblationCell]) -> str:
    if not cells:
        return ""
    b2n = cells[0].results[0].harmonic_mean is not None
    headers = ["Cell", "Base", "New", "HM"] if b2n else ["Cell", "Top-1"]
    return format_table(
        headers, [[c.name, *_headline(c.results)] for c in cells])


def run_ablation(
    base_config: Optional[Path],
    base_overrides: Sequence[str],
    grid: Grid,
    out_dir: Path,
    settings: Optional[Settings] = None,
    overwrite: bool = False,
) -> Path:
    """
    Train every grid cell into its own directory and compare them.

    Returns:
        Path of ``ablation.md``, the comparison table

    Raises:
        ConfigError: If a cell does not resolve
        OutputExistsError: If ``out_dir`` holds an earlier ablation and
            ``overwrite`` is not set
    """
    if not grid:
        raise ConfigError("The ablation grid is empty.")
    # Resolve every cell first so a bad key fails before any training.
    configs = {
        name: load_config(base_config, [*base_overrides, *overrides])
        for name, overrides in grid.items()
    }
    out_dir = Path(out_dir)
    existing = [name for name in SUMMARY_FILES
                if (out_dir / name).exists()]
    if existing and not overwrite:
        raise OutputExistsError(
            f"{out_dir} already holds an ablation "
            f"({', '.join(existing)}); pass --overwrite to replace it")
    cells = []
    for name, config in configs.items():
        logger.info("Ablation cell %s", name)
        run = train_run(config, out_dir / name, settings,
                        overwrite=overwrite)
        cells.append(AblationCell(name, run.manifest_path, run.results))

    table = comparison_table(cells)
    summary = {
        "cells": [{
            "name": c.name,
            "manifest": str(c.manifest_path),
            "results": [r.to_dict() for r in c.results],
        } for c in cells],
    }
    (out_dir / "ablation.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True))
    table_path = out_dir / "ablation.md"
    table_path.write_text(table + "\n")
    return table_path
