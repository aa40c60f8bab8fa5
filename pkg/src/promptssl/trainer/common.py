"""
Common types for training.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from torch import Tensor

from promptssl.common import PromptSSLError

CHECKPOINT_FORMAT = "promptssl-checkpoint"
CHECKPOINT_VERSION = 1
RUN_MANIFEST_FORMAT = "promptssl-run"
RUN_MANIFEST_VERSION = 1


class TrainingError(PromptSSLError):
    """Exception raised when a training step or run has to abort."""
    pass


class CheckpointError(PromptSSLError):
    """Exception raised for unreadable or incompatible checkpoints."""
    pass


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    steps: int
    l_con: float
    l_ce: float
    l_sem: float
    l_total: float
    train_accuracy: float
    lr: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class Checkpoint:
    """
    Everything needed to resume or evaluate one seed of a run.

    Trainable states only; the frozen backbone is rebuilt from the
    config.
    """

    config: Dict[str, Any]
    config_hash: str
    seed: int
    epoch: int
    class_names: List[str]
    rho: Dict[str, Tensor]
    pv: Dict[str, Tensor]
    frg: Dict[str, Tensor]
    optimizer: Optional[Dict[str, Any]] = None
    scheduler: Optional[Dict[str, Any]] = None
    rng_state: Optional[Tensor] = None
    metrics: List[Dict[str, Any]] = field(default_factory=list)

    def to_payload(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["format"] = CHECKPOINT_FORMAT
        payload["version"] = CHECKPOINT_VERSION
        return payload

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "Checkpoint":
        if payload.get("format") != CHECKPOINT_FORMAT:
            raise CheckpointError("Not a promptssl checkpoint.")
        if payload.get("version") != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"Unsupported checkpoint version {payload.get('version')}")
        fields = {k: v for k, v in payload.items()
                  if k not in ("format", "version")}
        try:
            return cls(**fields)
        except TypeError as e:
            raise CheckpointError(f"Malformed checkpoint: {e}") from e
