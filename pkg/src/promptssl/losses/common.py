"""
Common types for the training objectives.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

import torch
from torch import Tensor

from promptssl.common import PromptSSLError


class LossError(PromptSSLError):
    """Exception raised for degenerate or misaligned loss inputs."""
    pass


class NonFiniteLossError(LossError):
    """Exception raised when a loss term is NaN or infinite."""

    def __init__(self, message: str, terms: Dict[str, float]):
        super().__init__(message)
        self.terms = terms


class ProtocolViolationError(LossError):
    """Exception raised for labels outside the seen label set."""
    pass


@dataclass(frozen=True)
class PosteriorRow:
    """Class posteriors p(y_k | x) and the logits they came from."""

    logits: Tensor
    probs: Tensor

    @classmethod
    def from_logits(cls, logits: Tensor) -> "PosteriorRow":
        return cls(logits=logits, probs=torch.softmax(logits, dim=-1))

    @property
    def num_classes(self) -> int:
        return self.logits.shape[-1]


@dataclass(frozen=True)
class LossReport:
    """
    Per-term values of one training step.

    Disabled terms are reported as 0.0. ``total`` keeps the autograd
    graph of l_total for the optimizer step and is left out of
    comparisons and reprs.
    """

    l_con: float
    l_ce: float
    l_sem: float
    l_total: float
    enable_con: bool
    enable_ce: bool
    enable_sem: bool
    batch_size: int
    temperature: float
    total: Optional[Tensor] = field(default=None, repr=False,
                                    compare=False)

    def as_dict(self) -> Dict[str, float]:
        return {
            "l_con": self.l_con,
            "l_ce": self.l_ce,
            "l_sem": self.l_sem,
            "l_total": self.l_total,
        }
