"""
Common types for dataset manifests and protocol splits.
"""
import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from promptssl.common import PromptSSLError

MANIFEST_SCHEMA_VERSION = 1


class DatasetError(PromptSSLError):
    """Exception raised for invalid manifests, empty classes and bad splits."""
    pass


class SampleRecord(BaseModel):
    """One image of a dataset."""

    model_config = ConfigDict(extra="forbid", frozen=True,
                              populate_by_name=True)

    path: str
    class_id: int = Field(alias="class", ge=0)
    domain: Optional[str] = None


class DatasetManifest(BaseModel):
    """
    A dataset: ordered class names, sample records and named splits.

    ``splits`` maps a split name (``train``, ``test``) to sample indices.
    Images are decoded lazily from the sample paths.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    schema_version: int = MANIFEST_SCHEMA_VERSION
    name: str = Field(min_length=1)
    classes: List[str] = Field(min_length=1)
    samples: List[SampleRecord]
    splits: Dict[str, List[int]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_ids(self) -> "DatasetManifest":
        if self.schema_version != MANIFEST_SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {self.schema_version}")
        seen = set()
        for name in self.classes:
            if not name.strip():
                raise ValueError("class names must be non-empty")
            if name in seen:
                raise ValueError(f"duplicate class '{name}'")
            seen.add(name)
        for index, sample in enumerate(self.samples):
            if sample.class_id >= len(self.classes):
                raise ValueError(
                    f"samples.{index}.class: id {sample.class_id} outside "
                    f"[0, {len(self.classes)})")
        for split, indices in self.splits.items():
            for index in indices:
                if not 0 <= index < len(self.samples):
                    raise ValueError(
                        f"splits.{split}: sample index {index} out of range")
        return self

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def indices(self, split: Optional[str] = None) -> List[int]:
        """Sample indices of a split; every sample when it is missing."""
        if split is None or split not in self.splits:
            return list(range(len(self.samples)))
        return list(self.splits[split])

    def class_index(self, name: str) -> int:
        try:
            return self.classes.index(name)
        except ValueError:
            raise DatasetError(
                f"Class '{name}' is not in dataset '{self.name}'") from None


class ProtocolKind(str, enum.Enum):
    """Evaluation protocol families."""

    NONE = "none"
    BASE_TO_NEW = "base_to_new"
    CROSS_DATASET = "cross_dataset"
    DOMAIN_GENERALIZATION = "domain_generalization"


@dataclass(frozen=True)
class ProtocolSplit:
    """
    Seen/unseen label sets for one protocol.

    ``seen`` and ``unseen`` are class names of the source dataset, or of
    the targets for cross-dataset unseen classes. ``target_classes``
    gives, per target dataset, the target's own class names evaluated
    there, aligned with ``seen`` for domain generalization.
    """

    kind: ProtocolKind
    seen: Tuple[str, ...]
    unseen: Tuple[str, ...]
    source: str
    targets: Tuple[str, ...] = ()
    target_classes: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "seen": list(self.seen),
            "unseen": list(self.unseen),
            "source": self.source,
            "targets": list(self.targets),
            "target_classes": {
                k: list(v) for k, v in self.target_classes.items()},
            "seed": self.seed,
        }
