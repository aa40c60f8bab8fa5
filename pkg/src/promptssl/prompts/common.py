"""
Common types for prompt generation and assembly.
"""
import enum
from dataclasses import dataclass

import torch
from torch import Tensor

from promptssl.common import PromptSSLError


class PromptError(PromptSSLError):
    """Exception raised for invalid prompt shapes or capacity overflow."""
    pass


class PromptInit(str, enum.Enum):
    """How the decoder heads of the meta-network start out."""

    MANUAL = "manual"
    RANDOM = "random"
    NONE = "none"


@dataclass(frozen=True)
class PromptBundle:
    """
    An assembled prompt [c_1; ...; c_M; CLS_y] for one class.

    ``context_tokens`` is (M, E) for one image or (B, M, E) for a batch;
    ``class_tokens`` is (L_y, E) and always comes last.
    """

    context_tokens: Tensor
    class_tokens: Tensor
    class_id: int

    @property
    def context_length(self) -> int:
        return self.context_tokens.shape[-2]

    @property
    def length(self) -> int:
        return self.context_length + self.class_tokens.shape[0]

    def tokens(self) -> Tensor:
        """The full token sequence, batched like the context tokens."""
        class_tokens = self.class_tokens.to(
            device=self.context_tokens.device,
            dtype=self.context_tokens.dtype)
        if self.context_tokens.dim() == 3:
            batch = self.context_tokens.shape[0]
            class_tokens = class_tokens.unsqueeze(0).expand(batch, -1, -1)
        return torch.cat([self.context_tokens, class_tokens], dim=-2)
