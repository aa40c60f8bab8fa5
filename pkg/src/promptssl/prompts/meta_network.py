"""
The meta-network that turns a prompt seed into M context tokens.

One bottleneck encoder (Linear-ReLU-Linear) feeds M independent affine
decoder heads; head m emits context token c_m. The same instance serves
the original image and both augmented views.
"""
import logging
from typing import Optional

import torch
from torch import Tensor, nn

from promptssl.prompts.common import PromptError, PromptInit

logger = logging.getLogger(__name__)

INIT_STD = 0.02


def default_hidden_width(d_seed: int) -> int:
    """Bottleneck width: d_seed / 16, at least 16."""
    return max(16, d_seed // 16)


class MetaNetwork(nn.Module):
    """Single encoder, M decoders."""

    def __init__(
        self,
        d_seed: int,
        embed_dim: int,
        context_length: int,
        hidden_width: Optional[int] = None,
        base_width: Optional[int] = None,
        init: PromptInit = PromptInit.MANUAL,
        template_tokens: Optional[Tensor] = None,
        identity_decoders: bool = False,
    ):
        super().__init__()
        if context_length < 1:
            raise PromptError(
                f"Context length must be at least 1, got {context_length}")
        self.d_seed = d_seed
        self.embed_dim = embed_dim
        self.context_length = context_length
        hidden = hidden_width or default_hidden_width(d_seed)
        base = base_width or embed_dim
        self.encoder = nn.Sequential(
            nn.Linear(d_seed, hidden),
            nn.ReLU(),
            nn.Linear(hidden, base),
        )
        self.decoders = nn.ModuleList(
            nn.Linear(base, embed_dim) for _ in range(context_length))

        if identity_decoders:
            self._identity_decoders(base)
        else:
            self._init_decoders(PromptInit(init), template_tokens)

    def _identity_decoders(self, base: int) -> None:
        if base != self.embed_dim:
            raise PromptError(
                "Identity decoders need base width == embed_dim")
        with torch.no_grad():
            for decoder in self.decoders:
                decoder.weight.copy_(torch.eye(self.embed_dim))
                decoder.bias.zero_()

    def _init_decoders(self, init: PromptInit,
                       template_tokens: Optional[Tensor]) -> None:
        with torch.no_grad():
            if init is PromptInit.RANDOM:
                for decoder in self.decoders:
                    nn.init.normal_(decoder.weight, std=INIT_STD)
                    nn.init.normal_(decoder.bias, std=INIT_STD)
                return

            for decoder in self.decoders:
                decoder.weight.zero_()
                decoder.bias.zero_()
            if init is PromptInit.NONE:
                return

            if template_tokens is None:
                raise PromptError("Manual init needs template tokens.")
            if template_tokens.shape[-1] != self.embed_dim:
                raise PromptError(
                    f"Template width {template_tokens.shape[-1]} does "
                    f"not match embed_dim {self.embed_dim}")
            n_template = template_tokens.shape[0]
            if n_template != self.context_length:
                logger.warning(
                    "Template has %d tokens but context length is %d; "
                    "extra heads start from Gaussian biases",
                    n_template, self.context_length)
            for index, decoder in enumerate(self.decoders):
                if index < n_template:
                    decoder.bias.copy_(template_tokens[index])
                else:
                    nn.init.normal_(decoder.bias, std=INIT_STD)

    def forward(self, seed: Tensor) -> Tensor:
        if seed.shape[-1] != self.d_seed:
            raise PromptError(
                f"Prompt seed width {seed.shape[-1]} does not match "
                f"d_seed {self.d_seed}")
        base = self.encoder(seed)
        return torch.stack([decoder(base) for decoder in self.decoders],
                           dim=-2)


def generate_context(rho: MetaNetwork, seed: Tensor) -> Tensor:
    """
    Generate context tokens for a batch of prompt seeds.

    Args:
        rho: The meta-network
        seed: (B, d_seed) or (d_seed,) prompt seeds

    Returns:
        (B, M, embed_dim) or (M, embed_dim) context tokens
    """
    return rho(seed)
