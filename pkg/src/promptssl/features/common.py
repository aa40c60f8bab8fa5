"""
Common types for content/style feature extraction.
"""
from dataclasses import dataclass

import torch
from torch import Tensor

from promptssl.common import PromptSSLError


class FeatureError(PromptSSLError):
    """Exception raised for degenerate or mis-sized feature inputs."""
    pass


@dataclass(frozen=True)
class StyleVector:
    """Channel-wise statistics of the last tapped layer."""

    mean: Tensor
    std: Tensor

    def as_tensor(self) -> Tensor:
        return torch.cat([self.mean, self.std], dim=-1)

    @property
    def width(self) -> int:
        return self.mean.shape[-1] + self.std.shape[-1]
