"""
Deterministic toy dual encoder.

A fixed-seed convolutional vision encoder with L strided layers and a
fixed-seed text encoder over an orthonormal word table. Both are small
enough to train against on a CPU and exercise every code path of the
framework without pretrained weights.
"""
import zlib
from typing import List, Sequence, Tuple

import torch
from torch import Tensor, nn

from promptssl.backbone.common import (
    BackboneError,
    TextBackbone,
    VisionBackbone,
)
from promptssl.utils.seeding import torch_seeded

# Fixed rows for the words of the default prompt template.
_RESERVED_WORDS = {"<pad>": 0, "a": 1, "photo": 2, "of": 3}


class ToyVisionBackbone(VisionBackbone):
    """Random-weight strided conv encoder with one tap per layer."""

    def __init__(self, layer_dims: Sequence[int] = (8, 16, 32),
                 image_size: int = 32, output_dim: int = 64,
                 seed: int = 0):
        super().__init__()
        if not layer_dims:
            raise BackboneError("The toy vision encoder needs layers.")
        final_side = image_size // (2 ** (len(layer_dims) - 1))
        if final_side * final_side < 2:
            raise BackboneError(
                f"image_size {image_size} leaves fewer than 2 positions "
                f"in layer {len(layer_dims)}")
        self.layer_count = len(layer_dims)
        self.per_layer_dims = list(layer_dims)
        self.output_dim = output_dim
        self.image_size = image_size
        self.mean = (0.5, 0.5, 0.5)
        self.std = (0.5, 0.5, 0.5)

        with torch_seeded(seed):
            layers = []
            in_channels = 3
            for index, width in enumerate(layer_dims):
                stride = 1 if index == 0 else 2
                layers.append(nn.Conv2d(in_channels, width, kernel_size=3,
                                        stride=stride, padding=1))
                in_channels = width
            self.layers = nn.ModuleList(layers)
            self.proj = nn.Linear(in_channels, output_dim)
        self.freeze()

    def _forward_taps(self,
                      images: Tensor) -> Tuple[List[Tensor], Tensor]:
        maps = []
        x = images
        for layer in self.layers:
            x = torch.tanh(layer(x))
            maps.append(x.flatten(2))
        final = self.proj(maps[-1].mean(dim=2))
        return maps, final


class ToyTextBackbone(TextBackbone):
    """
    Fixed-seed text encoder over an orthonormal vocabulary.

    Every word maps to one row of an orthonormal matrix: the template
    words have reserved rows, other words are hashed onto the rest.
    """

    def __init__(self, embed_dim: int = 64, output_dim: int = 64,
                 context_capacity: int = 77, seed: int = 0):
        super().__init__()
        if embed_dim < len(_RESERVED_WORDS) + 1:
            raise BackboneError(
                f"embed_dim {embed_dim} is too small for the toy "
                "vocabulary")
        self.context_capacity = context_capacity
        self.embed_dim = embed_dim
        self.output_dim = output_dim

        with torch_seeded(seed + 1):
            gaussian = torch.randn(embed_dim, embed_dim)
            orthonormal, _ = torch.linalg.qr(gaussian)
            self.register_buffer("vocabulary", orthonormal)
            self.positional = nn.Parameter(
                0.1 * torch.randn(context_capacity, embed_dim))
            self.hidden = nn.Linear(embed_dim, embed_dim)
            self.proj = nn.Linear(embed_dim, output_dim)
        self.freeze()

    def token_ids(self, text: str) -> List[int]:
        """Map whitespace-separated words to vocabulary rows."""
        free_rows = self.embed_dim - len(_RESERVED_WORDS)
        ids = []
        for word in text.lower().split():
            if word in _RESERVED_WORDS:
                ids.append(_RESERVED_WORDS[word])
            else:
                offset = zlib.crc32(word.encode("utf-8")) % free_rows
                ids.append(len(_RESERVED_WORDS) + offset)
        return ids

    def embed_words(self, text: str) -> Tensor:
        ids = self.token_ids(text)
        if not ids:
            raise BackboneError("Cannot embed empty text.")
        return self.vocabulary[torch.tensor(ids)].clone()

    def _forward_embeddings(self, token_embeddings: Tensor,
                            lengths: Tensor) -> Tensor:
        length = token_embeddings.shape[1]
        hidden = torch.tanh(
            self.hidden(token_embeddings + self.positional[:length]))
        positions = torch.arange(length, device=hidden.device)
        mask = (positions[None, :] < lengths[:, None]).to(hidden.dtype)
        mean = (hidden * mask.unsqueeze(-1)).sum(1)
        mean = mean / lengths.to(hidden.dtype).unsqueeze(-1)
        last = hidden[torch.arange(hidden.shape[0]), lengths - 1]
        return self.proj(mean + last)
