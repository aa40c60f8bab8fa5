# Training objectives
from promptssl.losses.classification import (
    class_posterior,
    cosine_logits,
    cross_entropy_loss,
)
from promptssl.losses.common import (
    LossError,
    LossReport,
    NonFiniteLossError,
    PosteriorRow,
    ProtocolViolationError,
)
from promptssl.losses.consistency import prompt_consistency_loss
from promptssl.losses.contrastive import nt_xent
from promptssl.losses.total import LOSS_PRESETS, total_loss

__all__ = [
    "LOSS_PRESETS",
    "LossError",
    "LossReport",
    "NonFiniteLossError",
    "PosteriorRow",
    "ProtocolViolationError",
    "class_posterior",
    "cosine_logits",
    "cross_entropy_loss",
    "nt_xent",
    "prompt_consistency_loss",
    "total_loss",
]
