"""
Few-shot episodes and the triplet dataset fed to the training loop.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import torch
import torchvision.transforms.functional as F
from torch import Tensor
from torch.utils.data import Dataset

from promptssl.augment import make_triplet
from promptssl.config import AugmentConfig
from promptssl.dataio import DatasetError, DatasetManifest, load_image
from promptssl.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Episode:
    """
    A few-shot training set.

    ``labels`` are positions in ``class_ids``, the seen label set.
    """

    sample_ids: Tuple[int, ...]
    labels: Tuple[int, ...]
    class_ids: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.sample_ids)


def build_episode(
    manifest: DatasetManifest,
    class_ids: Sequence[int],
    shots: Optional[int],
    seed: int,
    split: str = "train",
) -> Episode:
    """
    Draw ``shots`` training samples per seen class.

    Args:
        manifest: Source dataset
        class_ids: Seen classes, in label order
        shots: Samples per class; None takes every sample
        seed: Episode seed
        split: Manifest split to sample from

    Returns:
        Episode, a pure function of its arguments

    Raises:
        DatasetError: If a seen class has no samples in the split
    """
    by_class: Dict[int, list] = {c: [] for c in class_ids}
    for index in manifest.indices(split):
        class_id = manifest.samples[index].class_id
        if class_id in by_class:
            by_class[class_id].append(index)

    sample_ids = []
    labels = []
    for label, class_id in enumerate(class_ids):
        candidates = sorted(by_class[class_id])
        if not candidates:
            raise DatasetError(
                f"Class '{manifest.classes[class_id]}' has no '{split}' "
                "samples")
        if shots is None or shots >= len(candidates):
            if shots is not None and shots > len(candidates):
                logger.warning(
                    "Class '%s' has %d samples, fewer than %d shots; "
                    "using all of them",
                    manifest.classes[class_id], len(candidates), shots)
            chosen = candidates
        else:
            rng = np.random.default_rng(
                derive_seed(seed, "episode", class_id))
            picks = rng.choice(len(candidates), size=shots, replace=False)
            chosen = sorted(candidates[int(i)] for i in picks)
        sample_ids.extend(chosen)
        labels.extend([label] * len(chosen))
    return Episode(tuple(sample_ids), tuple(labels), tuple(class_ids))


class TripletDataset(Dataset):
    """
    Serves (x, x1, x2, label, sample_id) for an episode.

    The augmentation seed of a sample depends on the run seed, the epoch
    and the sample id only, so batches do not depend on worker count.
    """

    def __init__(
        self,
        manifest: DatasetManifest,
        episode: Episode,
        image_size: int,
        augment: AugmentConfig,
        normalization: Tuple[Sequence[float], Sequence[float]],
        seed: int,
    ):
        self.manifest = manifest
        self.episode = episode
        self.image_size = image_size
        self.augment = augment
        self.mean, self.std = (list(v) for v in normalization)
        self.seed = seed
        self.epoch = 0
        self._cache: Dict[int, Tensor] = {}

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch

    def _normalize(self, image: Tensor) -> Tensor:
        return F.normalize(image, self.mean, self.std)

    def _image(self, sample_id: int) -> Tensor:
        if sample_id not in self._cache:
            self._cache[sample_id] = load_image(
                self.manifest.samples[sample_id].path, self.image_size)
        return self._cache[sample_id]

    def __len__(self) -> int:
        return len(self.episode)

    def __getitem__(self, position: int):
        sample_id = self.episode.sample_ids[position]
        triplet = make_triplet(
            self._image(sample_id),
            derive_seed(self.seed, "augment", self.epoch, sample_id),
            self.augment,
            normalize=self._normalize,
        )
        label = torch.tensor(self.episode.labels[position])
        return triplet.x, triplet.x1, triplet.x2, label, sample_id
