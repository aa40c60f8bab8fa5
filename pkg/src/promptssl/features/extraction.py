"""
Content and style features, and the FRG layer that turns them into a
fixed-width prompt seed.

Content is the concatenation of the position-pooled response of every
selected layer, in layer order. Style is the per-channel mean and
population standard deviation of the last layer's positions. FRG maps
[content; mean; std] linearly to ``d_seed``.
"""
import math
from typing import Optional, Sequence

import torch
from torch import Tensor, nn

from promptssl.backbone.common import FeatureStack
from promptssl.common import ConfigError
from promptssl.features.common import FeatureError, StyleVector
from promptssl.utils.seeding import torch_seeded


def content_features(
    stack: FeatureStack, layers: Optional[Sequence[int]] = None
) -> Tensor:
    """
    Concatenate pooled per-layer features (F-hat).

    Args:
        stack: Backbone responses
        layers: 0-based layer indices to use; all layers when None

    Returns:
        Tensor (B, sum of selected widths), ordered first layer to last
    """
    if stack.layer_count < 1:
        raise FeatureError("Content features need at least one layer.")
    indices = range(stack.layer_count) if layers is None else layers
    selected = []
    for index in indices:
        if not 0 <= index < stack.layer_count:
            raise ConfigError(
                f"Content layer {index} outside [0, {stack.layer_count})")
        selected.append(stack.pooled[index])
    return torch.cat(selected, dim=-1)


def style_features(stack: FeatureStack,
                   epsilon: float = 1e-5) -> StyleVector:
    """
    Channel-wise mean and standard deviation of the last layer (F-bar).

    The standard deviation uses the population convention with
    ``epsilon`` added under the square root.

    Raises:
        FeatureError: If the last layer has fewer than two positions
    """
    last = stack.per_layer[-1]
    if last.shape[-1] < 2:
        raise FeatureError(
            "Style statistics need at least 2 positions in the last "
            f"layer, got {last.shape[-1]}")
    mean = last.mean(dim=-1)
    variance = last.var(dim=-1, correction=0)
    std = torch.sqrt(variance + epsilon)
    return StyleVector(mean=mean, std=std)


class FRG(nn.Module):
    """
    Feature rescaling to a fixed prompt-seed width.

    The projection is drawn once from a fixed seed and stored as a
    buffer, so it adds no trainable parameters unless ``trainable`` is
    set. ``mode="identity"`` passes the concatenation through unchanged.
    """

    def __init__(self, in_width: int, d_seed: int,
                 mode: str = "projection", trainable: bool = False,
                 seed: int = 0):
        super().__init__()
        self.in_width = in_width
        self.d_seed = d_seed
        self.mode = mode
        if mode == "identity":
            if in_width != d_seed:
                raise ConfigError(
                    f"Identity FRG needs d_seed == input width "
                    f"({in_width}), got {d_seed}")
            matrix = torch.eye(in_width)
        elif mode == "projection":
            with torch_seeded(seed):
                matrix = torch.randn(in_width, d_seed)
            matrix = matrix / math.sqrt(in_width)
        else:
            raise ConfigError(f"Unknown FRG mode '{mode}'")

        if trainable:
            self.weight = nn.Parameter(matrix)
        else:
            self.register_buffer("weight", matrix)

    @property
    def trainable(self) -> bool:
        return isinstance(self.weight, nn.Parameter)

    def forward(self, content: Tensor, style: StyleVector) -> Tensor:
        joined = torch.cat([content, style.as_tensor()], dim=-1)
        if joined.shape[-1] != self.in_width:
            raise FeatureError(
                f"FRG expects width {self.in_width}, got "
                f"{joined.shape[-1]}")
        return joined @ self.weight


def frg(layer: FRG, content: Tensor, style: StyleVector) -> Tensor:
    """Rescale [content; style] to a PromptSeed of width d_seed."""
    return layer(content, style)


def seed_width(per_layer_dims: Sequence[int],
               layers: Optional[Sequence[int]] = None) -> int:
    """Width of [F-hat; F-bar] for a backbone configuration."""
    indices = range(len(per_layer_dims)) if layers is None else layers
    content = sum(per_layer_dims[i] for i in indices)
    return content + 2 * per_layer_dims[-1]
