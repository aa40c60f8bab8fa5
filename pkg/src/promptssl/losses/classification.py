"""
Class posteriors over prompt embeddings and the cross-entropy objective.
"""
import torch
import torch.nn.functional as F
from torch import Tensor

from promptssl.losses.common import (
    LossError,
    PosteriorRow,
    ProtocolViolationError,
)

NORM_FLOOR = 1e-12


def cosine_logits(z_img: Tensor, prompt_embeds: Tensor,
                  temperature: float) -> Tensor:
    """
    Cosine similarities between images and class prompts, over tau.

    Args:
        z_img: (B, D) image embeddings
        prompt_embeds: (B, K, D) per-image prompts or (K, D) shared ones
        temperature: tau

    Returns:
        (B, K) logits
    """
    if temperature <= 0:
        raise LossError(f"Temperature must be positive, got {temperature}")
    if z_img.dim() == 1:
        z_img = z_img.unsqueeze(0)
    if z_img.shape[-1] != prompt_embeds.shape[-1]:
        raise LossError(
            f"Image width {z_img.shape[-1]} differs from prompt width "
            f"{prompt_embeds.shape[-1]}")
    if (z_img.norm(dim=-1) < NORM_FLOOR).any():
        raise LossError("Zero-norm image embedding.")
    if (prompt_embeds.norm(dim=-1) < NORM_FLOOR).any():
        raise LossError("Zero-norm prompt embedding.")

    image = F.normalize(z_img, dim=-1)
    prompts = F.normalize(prompt_embeds, dim=-1)
    if prompts.dim() == 2:
        similarity = image @ prompts.T
    else:
        if prompts.shape[0] != image.shape[0]:
            raise LossError(
                f"{prompts.shape[0]} prompt sets for {image.shape[0]} "
                "images")
        similarity = torch.einsum("bd,bkd->bk", image, prompts)
    return similarity / temperature


def class_posterior(z_img: Tensor, prompt_embeds: Tensor,
                    temperature: float) -> PosteriorRow:
    """
    Softmax over cosine similarities divided by tau.

    Raises:
        LossError: On zero-norm embeddings or width mismatch
    """
    return PosteriorRow.from_logits(
        cosine_logits(z_img, prompt_embeds, temperature))


def cross_entropy_loss(posteriors: PosteriorRow, labels: Tensor) -> Tensor:
    """
    Mean negative log-likelihood of the labels.

    Raises:
        ProtocolViolationError: If a label is outside the label set
    """
    logits = posteriors.logits
    if logits.dim() == 1:
        logits = logits.unsqueeze(0)
    labels = labels.reshape(-1).long()
    if labels.shape[0] != logits.shape[0]:
        raise LossError(
            f"{labels.shape[0]} labels for {logits.shape[0]} posteriors")
    num_classes = logits.shape[-1]
    if labels.numel() and (labels.min() < 0 or labels.max() >= num_classes):
        raise ProtocolViolationError(
            f"Labels {labels.tolist()} fall outside the {num_classes} "
            "seen classes")
    return F.cross_entropy(logits, labels)
