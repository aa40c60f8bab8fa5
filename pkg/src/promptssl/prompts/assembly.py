"""
Prompt assembly and text encoding of assembled prompts.
"""
from typing import Optional, Sequence

import torch
from torch import Tensor

from promptssl.backbone.common import TextBackbone
from promptssl.prompts.common import PromptBundle, PromptError


def assemble_prompt(
    tokens: Tensor,
    class_tokens: Tensor,
    class_id: int = 0,
    capacity: Optional[int] = None,
) -> PromptBundle:
    """
    Assemble [c_1; ...; c_M; CLS_y].

    Args:
        tokens: Context tokens (M, E) or (B, M, E)
        class_tokens: Class-name embedding (L_y, E)
        class_id: Label the bundle belongs to
        capacity: Text-encoder context capacity, checked when given

    Returns:
        PromptBundle with the class tokens last

    Raises:
        PromptError: If M < 1, widths differ or capacity is exceeded
    """
    if tokens.dim() not in (2, 3) or tokens.shape[-2] < 1:
        raise PromptError(
            "Prompts need at least one context token, got shape "
            f"{tuple(tokens.shape)}")
    if class_tokens.dim() != 2 or class_tokens.shape[0] < 1:
        raise PromptError("Class tokens must be a non-empty (L, E) tensor.")
    if class_tokens.shape[-1] != tokens.shape[-1]:
        raise PromptError(
            f"Class token width {class_tokens.shape[-1]} differs from "
            f"context width {tokens.shape[-1]}")
    bundle = PromptBundle(tokens, class_tokens, class_id)
    if capacity is not None and bundle.length > capacity:
        raise PromptError(
            f"Prompt of {bundle.length} tokens exceeds capacity {capacity}")
    return bundle


def prompt_embedding(backbone: TextBackbone, bundle: PromptBundle) -> Tensor:
    """Encode an assembled prompt with the frozen text encoder."""
    return backbone.encode_text(bundle.tokens())


def encode_class_prompts(
    backbone: TextBackbone,
    context: Tensor,
    class_tokens: Sequence[Tensor],
) -> Tensor:
    """
    Encode the prompt of every class for every image in one pass.

    Prompts of different lengths are right-padded and their valid
    lengths passed to the encoder.

    Args:
        backbone: Frozen text encoder
        context: (B, M, E) context tokens, one set per image
        class_tokens: One (L_k, E) embedding per class in the label set

    Returns:
        (B, K, output_dim) prompt embeddings
    """
    if not class_tokens:
        raise PromptError("The label set is empty.")
    batch, n_context, width = context.shape
    longest = n_context + max(t.shape[0] for t in class_tokens)
    if longest > backbone.context_capacity:
        raise PromptError(
            f"Prompt of {longest} tokens exceeds capacity "
            f"{backbone.context_capacity}")

    rows = []
    lengths = []
    for class_id, tokens in enumerate(class_tokens):
        bundle = assemble_prompt(context, tokens, class_id)
        sequence = bundle.tokens()
        pad = longest - sequence.shape[1]
        if pad:
            sequence = torch.cat([
                sequence,
                sequence.new_zeros(batch, pad, width),
            ], dim=1)
        rows.append(sequence)
        lengths.append(bundle.length)

    stacked = torch.stack(rows, dim=1).reshape(-1, longest, width)
    lengths_tensor = torch.tensor(lengths, device=context.device)
    encoded = backbone.encode_text(stacked, lengths_tensor.repeat(batch))
    return encoded.reshape(batch, len(class_tokens), -1)
