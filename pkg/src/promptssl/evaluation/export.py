"""
Joint-space embedding export for external visualization.
"""
import csv
import logging
from pathlib import Path
from typing import Optional

import torch

from promptssl.common import OutputExistsError
from promptssl.dataio import DatasetManifest, load_image
from promptssl.evaluation.common import EvaluationError
from promptssl.model import PromptSSLModel
from promptssl.projectors import project

logger = logging.getLogger(__name__)


def export_embeddings(
    model: PromptSSLModel,
    manifest: DatasetManifest,
    out_path: Path,
    split: Optional[str] = None,
    batch_size: int = 32,
    overwrite: bool = False,
) -> Path:
    """
    Write per-sample P_v embeddings as CSV.

    The header is ``id,class,d_0,...,d_{D-1}``; ``id`` is the sample
    index and ``class`` its class id. Projection runs in eval mode, so
    repeated exports are byte-identical.

    Raises:
        OutputExistsError: If the file exists and overwrite is False
        EvaluationError: If the file cannot be written
    """
    out_path = Path(out_path)
    if out_path.exists() and not overwrite:
        raise OutputExistsError(
            f"{out_path} exists; pass overwrite to replace it")
    model.eval()
    sample_ids = manifest.indices(split)
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with out_path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(
                ["id", "class"]
                + [f"d_{i}" for i in range(model.pv.d_joint)])
            for start in range(0, len(sample_ids), batch_size):
                chunk = sample_ids[start:start + batch_size]
                images = torch.stack([
                    load_image(manifest.samples[i].path, model.image_size)
                    for i in chunk])
                with torch.no_grad():
                    stack = model.vision.encode_image(
                        model.normalize(images))
                    embeddings = project(model.pv, stack.final_pooled,
                                         mode="eval").cpu()
                for sample_id, row in zip(chunk, embeddings.tolist()):
                    writer.writerow(
                        [sample_id, manifest.samples[sample_id].class_id]
                        + [f"{value:.8g}" for value in row])
    except OSError as e:
        raise EvaluationError(f"Cannot write {out_path}: {e}") from e
    logger.info("Exported %d embeddings to %s", len(sample_ids), out_path)
    return out_path
