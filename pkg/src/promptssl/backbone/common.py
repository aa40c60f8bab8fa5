"""
Common types for the frozen dual-encoder backbone.

This module defines the two encoder interfaces the rest of the package
talks to, the per-layer ``FeatureStack`` they produce, and the
``BackboneError`` raised on contract violations.
"""
import abc
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import torch
from torch import Tensor, nn

from promptssl.common import PromptSSLError

DEFAULT_TEMPERATURE = 0.07


class BackboneError(PromptSSLError):
    """Exception raised for backbone shape or capacity violations."""
    pass


@dataclass(frozen=True)
class FeatureStack:
    """
    Per-layer vision-encoder responses for a batch of images.

    ``per_layer`` holds L maps shaped (B, C_l, N_l) where N_l counts the
    spatial or token positions. ``pooled`` is the mean over positions of
    each map, computed once at extraction time.
    """

    per_layer: Tuple[Tensor, ...]
    final_pooled: Tensor
    pooled: Tuple[Tensor, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.per_layer:
            raise BackboneError("A FeatureStack needs at least one layer.")
        batch = self.final_pooled.shape[0]
        for index, layer in enumerate(self.per_layer):
            if layer.dim() != 3 or layer.shape[0] != batch:
                raise BackboneError(
                    f"Layer {index} map must be (B={batch}, C, N), "
                    f"got {tuple(layer.shape)}")
        pooled = tuple(layer.mean(dim=2) for layer in self.per_layer)
        object.__setattr__(self, "per_layer", tuple(self.per_layer))
        object.__setattr__(self, "pooled", pooled)

    @property
    def layer_count(self) -> int:
        return len(self.per_layer)

    @property
    def batch_size(self) -> int:
        return self.final_pooled.shape[0]


class _FrozenModule(nn.Module):
    """A module whose parameters never train and that stays in eval."""

    def freeze(self) -> None:
        for parameter in self.parameters():
            parameter.requires_grad_(False)
        super().train(False)

    def train(self, mode: bool = True):
        # Frozen encoders ignore train-mode requests.
        return super().train(False)

    @property
    def frozen(self) -> bool:
        return all(not p.requires_grad for p in self.parameters())


class VisionBackbone(_FrozenModule, abc.ABC):
    """Frozen vision encoder f_v exposing L per-layer taps."""

    layer_count: int
    per_layer_dims: List[int]
    output_dim: int
    image_size: int
    mean: Tuple[float, float, float]
    std: Tuple[float, float, float]

    @abc.abstractmethod
    def _forward_taps(self,
                      images: Tensor) -> Tuple[List[Tensor], Tensor]:
        """Return the tapped (B, C, N) maps and the pooled feature."""

    def normalize(self, images: Tensor) -> Tensor:
        """Apply the backbone's channel normalization to [0, 1] images."""
        mean = torch.tensor(self.mean, dtype=images.dtype,
                            device=images.device).view(-1, 1, 1)
        std = torch.tensor(self.std, dtype=images.dtype,
                           device=images.device).view(-1, 1, 1)
        return (images - mean) / std

    def encode_image(self, images: Tensor) -> FeatureStack:
        """
        Encode a batch of normalized images.

        Args:
            images: Tensor shaped (B, 3, S, S) with S the backbone
                resolution

        Returns:
            FeatureStack with exactly ``layer_count`` maps

        Raises:
            BackboneError: If the shape does not match the backbone
        """
        expected = (3, self.image_size, self.image_size)
        if images.dim() != 4 or tuple(images.shape[1:]) != expected:
            raise BackboneError(
                f"Expected images shaped (B, {expected[0]}, {expected[1]}, "
                f"{expected[2]}), got {tuple(images.shape)}")
        with torch.no_grad():
            maps, final = self._forward_taps(images)
        return FeatureStack(per_layer=tuple(maps), final_pooled=final)


class TextBackbone(_FrozenModule, abc.ABC):
    """Frozen text encoder f_t consuming continuous token embeddings."""

    context_capacity: int
    embed_dim: int
    output_dim: int

    @abc.abstractmethod
    def _forward_embeddings(self, token_embeddings: Tensor,
                            lengths: Tensor) -> Tensor:
        """Encode (N, T, E) embeddings whose valid prefix is lengths."""

    @abc.abstractmethod
    def embed_words(self, text: str) -> Tensor:
        """Token embeddings (T, E) for a piece of text."""

    @property
    def temperature(self) -> float:
        """Softmax temperature the backbone was trained with."""
        return DEFAULT_TEMPERATURE

    def encode_text(self, token_embeddings: Tensor,
                    lengths: Optional[Tensor] = None) -> Tensor:
        """
        Encode sequences of token embeddings.

        Args:
            token_embeddings: (N, T, E) or a single (T, E) sequence
            lengths: Optional valid length per row for padded batches

        Returns:
            Embeddings shaped (N, output_dim), or (output_dim,) for a
            single sequence

        Raises:
            BackboneError: On over-length or wrong-width input; sequences
                are never truncated silently
        """
        single = token_embeddings.dim() == 2
        if single:
            token_embeddings = token_embeddings.unsqueeze(0)
        if token_embeddings.dim() != 3:
            raise BackboneError(
                "Token embeddings must be (N, T, E), got "
                f"{tuple(token_embeddings.shape)}")
        n_rows, length, width = token_embeddings.shape
        if width != self.embed_dim:
            raise BackboneError(
                f"Token width {width} does not match embed_dim "
                f"{self.embed_dim}")
        if length > self.context_capacity:
            raise BackboneError(
                f"Prompt of {length} tokens exceeds the context capacity "
                f"of {self.context_capacity}; refusing to truncate")
        if length == 0:
            raise BackboneError("Cannot encode an empty token sequence.")
        if lengths is None:
            lengths = torch.full((n_rows,), length, dtype=torch.long,
                                 device=token_embeddings.device)
        encoded = self._forward_embeddings(token_embeddings, lengths)
        return encoded[0] if single else encoded

    def embed_class_name(self, class_name: str) -> Tensor:
        """
        Token embeddings for a class name, ready to follow the context.

        Raises:
            BackboneError: If the name is empty
        """
        cleaned = class_name.replace("_", " ").strip()
        if not cleaned:
            raise BackboneError("Class name must be a non-empty string.")
        return self.embed_words(cleaned)


def encode_image(backbone: VisionBackbone, image: Tensor) -> FeatureStack:
    """Encode one (3, S, S) image or a (B, 3, S, S) batch."""
    if image.dim() == 3:
        image = image.unsqueeze(0)
    return backbone.encode_image(image)


def encode_text(backbone: TextBackbone,
                token_embeddings: Tensor) -> Tensor:
    """Encode one sequence of token embeddings."""
    return backbone.encode_text(token_embeddings)


def embed_class_name(backbone: TextBackbone, class_name: str) -> Tensor:
    """Class-token embedding [CLS_y] for one class name."""
    return backbone.embed_class_name(class_name)


def embed_class_names(backbone: TextBackbone,
                      class_names: Sequence[str]) -> List[Tensor]:
    """Class-token embeddings for a label set, in label order."""
    with torch.no_grad():
        return [backbone.embed_class_name(name) for name in class_names]
