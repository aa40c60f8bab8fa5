"""
Protocol splits: base-to-new, cross-dataset and domain generalization.
"""
import logging
import math
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np
import yaml

from promptssl.dataio.common import (
    DatasetError,
    DatasetManifest,
    ProtocolKind,
    ProtocolSplit,
)
from promptssl.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def canonical_name(name: str) -> str:
    """Class-name key used to match classes across datasets."""
    return name.strip().lower()


def load_class_mapping(path: Optional[str]) -> Dict[str, str]:
    """
    Read a ``target class name -> source class name`` YAML mapping.

    Raises:
        DatasetError: If the file cannot be read or is not a mapping
    """
    if not path:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text()) or {}
    except (OSError, yaml.YAMLError) as e:
        raise DatasetError(f"Cannot read class mapping {path}: {e}") from e
    if not isinstance(data, dict):
        raise DatasetError(f"Class mapping {path} must be a mapping")
    return {canonical_name(str(k)): canonical_name(str(v))
            for k, v in data.items()}


def _base_to_new(source: DatasetManifest, seed: int) -> ProtocolSplit:
    count = source.num_classes
    if count < 2:
        raise DatasetError(
            f"Base-to-new needs at least 2 classes, '{source.name}' has "
            f"{count}")
    rng = np.random.default_rng(derive_seed(seed, "split", "base_to_new"))
    order = rng.permutation(count)
    seen_ids = set(int(i) for i in order[:math.ceil(count / 2)])
    seen = tuple(n for i, n in enumerate(source.classes) if i in seen_ids)
    unseen = tuple(
        n for i, n in enumerate(source.classes) if i not in seen_ids)
    return ProtocolSplit(
        kind=ProtocolKind.BASE_TO_NEW,
        seen=seen,
        unseen=unseen,
        source=source.name,
        seed=seed,
    )


def _cross_dataset(source: DatasetManifest,
                   targets: Sequence[DatasetManifest],
                   seed: int) -> ProtocolSplit:
    unseen = []
    for target in targets:
        for name in target.classes:
            if name not in unseen:
                unseen.append(name)
    return ProtocolSplit(
        kind=ProtocolKind.CROSS_DATASET,
        seen=tuple(source.classes),
        unseen=tuple(unseen),
        source=source.name,
        targets=tuple(t.name for t in targets),
        target_classes={t.name: tuple(t.classes) for t in targets},
        seed=seed,
    )


def _domain_generalization(
    source: DatasetManifest,
    targets: Sequence[DatasetManifest],
    seed: int,
    mapping: Dict[str, str],
) -> ProtocolSplit:
    source_keys = {canonical_name(n): n for n in source.classes}
    source_paths = [s.path for s in source.samples]
    per_target: Dict[str, Dict[str, str]] = {}
    for target in targets:
        if target.name == source.name or (
                source_paths
                and [s.path for s in target.samples] == source_paths):
            raise DatasetError(
                f"Target '{target.name}' is the source dataset again; "
                "domain generalization needs a shifted target")
        matched: Dict[str, str] = {}
        missing = []
        for name in target.classes:
            key = canonical_name(name)
            key = mapping.get(key, key)
            if key in source_keys:
                matched[source_keys[key]] = name
            else:
                missing.append(name)
        if missing:
            logger.warning(
                "Target '%s' classes without a source match: %s; add them "
                "to a class mapping file to include them",
                target.name, ", ".join(missing))
        per_target[target.name] = matched

    common = [n for n in source.classes
              if all(n in matched for matched in per_target.values())]
    if not common:
        raise DatasetError(
            "Source and targets share no classes for domain "
            "generalization")
    return ProtocolSplit(
        kind=ProtocolKind.DOMAIN_GENERALIZATION,
        seen=tuple(common),
        unseen=tuple(common),
        source=source.name,
        targets=tuple(t.name for t in targets),
        target_classes={
            name: tuple(matched[c] for c in common)
            for name, matched in per_target.items()},
        seed=seed,
    )


def make_split(
    manifests: Sequence[DatasetManifest],
    kind: str,
    seed: int,
    class_mapping: Optional[str] = None,
) -> ProtocolSplit:
    """
    Build the seen/unseen label sets of a protocol.

    Args:
        manifests: Source dataset first, then any targets
        kind: A ProtocolKind value
        seed: Split seed; equal seeds give equal splits
        class_mapping: Optional YAML file mapping target class names to
            source class names (domain generalization)

    Returns:
        ProtocolSplit satisfying the kind's set relations

    Raises:
        DatasetError: For an arity or invariant violation
    """
    if not manifests:
        raise DatasetError("A split needs at least one dataset.")
    kind = ProtocolKind(kind)
    source, targets = manifests[0], list(manifests[1:])

    if kind in (ProtocolKind.NONE, ProtocolKind.BASE_TO_NEW) and targets:
        raise DatasetError(f"Protocol '{kind.value}' takes one dataset, "
                           f"got {len(manifests)}")
    if kind in (ProtocolKind.CROSS_DATASET,
                ProtocolKind.DOMAIN_GENERALIZATION) and not targets:
        raise DatasetError(
            f"Protocol '{kind.value}' needs a source and at least one "
            "target dataset")

    if kind is ProtocolKind.NONE:
        return ProtocolSplit(kind=kind, seen=tuple(source.classes),
                             unseen=(), source=source.name, seed=seed)
    if kind is ProtocolKind.BASE_TO_NEW:
        return _base_to_new(source, seed)
    if kind is ProtocolKind.CROSS_DATASET:
        return _cross_dataset(source, targets, seed)
    return _domain_generalization(source, targets, seed,
                                  load_class_mapping(class_mapping))
