# Augmentation package: geometric and compositional views
from promptssl.augment.augmix import (
    KNOWN_OPS,
    apply_op,
    augmix_view,
    sample_recipe,
)
from promptssl.augment.common import (
    AugmentedTriplet,
    AugmentError,
    AugMixRecipe,
)
from promptssl.augment.moco import moco_view
from promptssl.augment.triplet import (
    make_triplet,
    split_seed,
    triplet_from_seeds,
)

__all__ = [
    "AugMixRecipe",
    "AugmentError",
    "AugmentedTriplet",
    "KNOWN_OPS",
    "apply_op",
    "augmix_view",
    "make_triplet",
    "moco_view",
    "sample_recipe",
    "split_seed",
    "triplet_from_seeds",
]
