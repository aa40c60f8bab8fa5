"""
Seed-reproducible (x, x1, x2) triplets.
"""
from typing import Callable, Optional, Tuple

import numpy as np
from torch import Tensor

from promptssl.augment.augmix import augmix_view, sample_recipe
from promptssl.augment.common import AugmentedTriplet
from promptssl.augment.moco import moco_view
from promptssl.config import AugmentConfig
from promptssl.utils.seeding import derive_seed

Normalizer = Callable[[Tensor], Tensor]


def split_seed(seed: int) -> Tuple[int, int]:
    """Independent sub-seeds for the geometric and compositional views."""
    return derive_seed(seed, "moco"), derive_seed(seed, "augmix")


def triplet_from_seeds(
    image: Tensor,
    moco_seed: int,
    augmix_seed: int,
    config: AugmentConfig,
    normalize: Optional[Normalizer] = None,
    seed: int = 0,
) -> AugmentedTriplet:
    """Build a triplet from explicit per-view seeds."""
    x1 = moco_view(image, moco_seed, config)
    recipe = sample_recipe(config, np.random.default_rng(augmix_seed))
    x2 = augmix_view(image, recipe, config)
    x = image
    if normalize is not None:
        x, x1, x2 = normalize(x), normalize(x1), normalize(x2)
    return AugmentedTriplet(x=x, x1=x1, x2=x2, seed=seed)


def make_triplet(
    image: Tensor,
    seed: int,
    config: AugmentConfig,
    normalize: Optional[Normalizer] = None,
) -> AugmentedTriplet:
    """
    Produce (x, x1, x2) for one unnormalized image.

    Args:
        image: (3, H, W) tensor in [0, 1]
        seed: Reproduction seed; sub-seeds for each view derive from it
        config: Augmentation settings
        normalize: Backbone normalization applied to all three images

    Returns:
        AugmentedTriplet, a pure function of (image, seed, config)
    """
    moco_seed, augmix_seed = split_seed(seed)
    return triplet_from_seeds(image, moco_seed, augmix_seed, config,
                              normalize=normalize, seed=seed)
