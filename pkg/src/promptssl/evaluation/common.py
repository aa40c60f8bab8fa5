"""
Common types for evaluation.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Protocol, Sequence, Tuple

from torch import Tensor

from promptssl.common import PromptSSLError


class EvaluationError(PromptSSLError):
    """Exception raised for invalid metric inputs or label vocabularies."""
    pass


class Scorer(Protocol):
    """Anything that scores normalized images against class prompts."""

    image_size: int

    def normalize(self, images: Tensor) -> Tensor: ...

    def class_tokens(self, class_names: Sequence[str]) -> List[Tensor]: ...

    def logits(self, images: Tensor,
               class_tokens: Sequence[Tensor]) -> Tensor: ...


@dataclass
class EvalResult:
    """
    Metrics of one protocol on one dataset.

    Base-to-new results fill ``base_acc``, ``new_acc`` and
    ``harmonic_mean``; the other protocols fill ``top1``. Accuracies are
    percentages. ``per_seed`` keeps the per-run values behind a mean.
    """

    protocol: str
    dataset: str
    top1: Optional[float] = None
    base_acc: Optional[float] = None
    new_acc: Optional[float] = None
    harmonic_mean: Optional[float] = None
    per_class: Dict[str, float] = field(default_factory=dict)
    num_samples: int = 0
    per_seed: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def headline(self) -> Tuple[Optional[float], ...]:
        return (self.top1, self.base_acc, self.new_acc, self.harmonic_mean)
