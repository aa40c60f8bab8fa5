"""
NT-Xent contrastive loss between two views of a batch.
"""
import torch
import torch.nn.functional as F
from torch import Tensor

from promptssl.losses.common import LossError


def nt_xent(z_a: Tensor, z_b: Tensor, temperature: float) -> Tensor:
    """
    Symmetric normalized temperature-scaled cross-entropy.

    Row i of ``z_a`` and row i of ``z_b`` are positives; every other of
    the 2B embeddings is a negative for them.

    Args:
        z_a: (B, D) embeddings of the first view
        z_b: (B, D) embeddings of the second view
        temperature: Softmax temperature

    Returns:
        Scalar loss, the mean over all 2B anchors

    Raises:
        LossError: For B < 2 or mismatched shapes
    """
    if z_a.shape != z_b.shape or z_a.dim() != 2:
        raise LossError(
            f"Views must share a (B, D) shape, got {tuple(z_a.shape)} and "
            f"{tuple(z_b.shape)}")
    batch = z_a.shape[0]
    if batch < 2:
        raise LossError("NT-Xent needs a batch of at least 2 (no negatives).")
    if temperature <= 0:
        raise LossError(f"Temperature must be positive, got {temperature}")

    z = F.normalize(torch.cat([z_a, z_b], dim=0), dim=-1)
    similarity = z @ z.T / temperature
    eye = torch.eye(2 * batch, dtype=torch.bool, device=z.device)
    similarity = similarity.masked_fill(eye, float("-inf"))
    index = torch.arange(batch, device=z.device)
    targets = torch.cat([index + batch, index])
    return F.cross_entropy(similarity, targets)
