"""
Checkpoint files: ``torch.save`` containers of plain state dicts.
"""
import logging
import pickle
from pathlib import Path
from typing import Optional, Tuple

import torch

from promptssl.config import RunConfig, Settings
from promptssl.model import PromptSSLModel, build_model
from promptssl.trainer.common import Checkpoint, CheckpointError

logger = logging.getLogger(__name__)


def save_checkpoint(checkpoint: Checkpoint, path: Path) -> Path:
    """Write a checkpoint atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = path.with_suffix(path.suffix + ".partial")
    torch.save(checkpoint.to_payload(), partial)
    partial.replace(path)
    logger.debug("Saved checkpoint %s (epoch %d)", path, checkpoint.epoch)
    return path


def load_checkpoint(path: Path) -> Checkpoint:
    """
    Read a checkpoint; only tensors and plain containers are unpickled.

    Raises:
        CheckpointError: If the file is missing, unreadable or foreign
    """
    try:
        payload = torch.load(Path(path), map_location="cpu",
                             weights_only=True)
    except (OSError, RuntimeError, EOFError,
            pickle.UnpicklingError) as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    if not isinstance(payload, dict):
        raise CheckpointError(f"Checkpoint {path} is not a mapping")
    return Checkpoint.from_payload(payload)


def load_model_from_checkpoint(
    path: Path, settings: Optional[Settings] = None
) -> Tuple[PromptSSLModel, Checkpoint]:
    """Rebuild the model a checkpoint was trained with, in eval mode."""
    checkpoint = load_checkpoint(path)
    config = RunConfig.model_validate(checkpoint.config)
    model = build_model(config, settings, seed=checkpoint.seed)
    model.load_trainable_state({
        "rho": checkpoint.rho,
        "pv": checkpoint.pv,
        "frg": checkpoint.frg,
    })
    model.eval()
    return model, checkpoint
