"""
AugMix-style compositional view.

A recipe is drawn once from a numpy Generator (Dirichlet chain weights,
Beta skip weight, per-chain op sequences with magnitudes); applying it is
deterministic. The default palette leaves out the colour, contrast,
brightness and sharpness ops because those overlap the corruptions used
by robustness benchmarks.
"""
import math
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import torch
import torchvision.transforms.functional as F
from torch import Tensor
from torchvision.transforms import InterpolationMode

from promptssl.augment.common import AugMixRecipe
from promptssl.augment.moco import check_image
from promptssl.common import ConfigError
from promptssl.config import AugmentConfig

NUM_BINS = 10

# name -> (magnitude bins or None, signed)
_OP_SPACE: Dict[str, Tuple[Optional[Callable[[], np.ndarray]], bool]] = {
    "Identity": (None, False),
    "ShearX": (lambda: np.linspace(0.0, 0.3, NUM_BINS), True),
    "ShearY": (lambda: np.linspace(0.0, 0.3, NUM_BINS), True),
    "TranslateX": (lambda: np.linspace(0.0, 1.0 / 3.0, NUM_BINS), True),
    "TranslateY": (lambda: np.linspace(0.0, 1.0 / 3.0, NUM_BINS), True),
    "Rotate": (lambda: np.linspace(0.0, 30.0, NUM_BINS), True),
    "Posterize": (
        lambda: 4 - np.round(np.arange(NUM_BINS) / ((NUM_BINS - 1) / 4)),
        False,
    ),
    "Solarize": (lambda: np.linspace(1.0, 0.0, NUM_BINS), False),
    "AutoContrast": (None, False),
    "Equalize": (None, False),
    "Brightness": (lambda: np.linspace(0.0, 0.9, NUM_BINS), True),
    "Color": (lambda: np.linspace(0.0, 0.9, NUM_BINS), True),
    "Contrast": (lambda: np.linspace(0.0, 0.9, NUM_BINS), True),
    "Sharpness": (lambda: np.linspace(0.0, 0.9, NUM_BINS), True),
}

KNOWN_OPS = tuple(_OP_SPACE)


def _to_uint8(image: Tensor) -> Tensor:
    return (image * 255.0).round().clamp(0, 255).to(torch.uint8)


def _from_uint8(image: Tensor, dtype: torch.dtype) -> Tensor:
    return image.to(dtype) / 255.0


def apply_op(image: Tensor, name: str, magnitude: float) -> Tensor:
    """Apply one palette op to a float (3, H, W) image in [0, 1]."""
    height, width = image.shape[-2:]
    nearest = InterpolationMode.NEAREST
    if name == "Identity":
        return image
    if name == "ShearX":
        return F.affine(image, angle=0.0, translate=[0, 0], scale=1.0,
                        shear=[math.degrees(math.atan(magnitude)), 0.0],
                        interpolation=nearest, center=[0, 0])
    if name == "ShearY":
        return F.affine(image, angle=0.0, translate=[0, 0], scale=1.0,
                        shear=[0.0, math.degrees(math.atan(magnitude))],
                        interpolation=nearest, center=[0, 0])
    if name == "TranslateX":
        return F.affine(image, angle=0.0,
                        translate=[int(magnitude * width), 0], scale=1.0,
                        shear=[0.0, 0.0], interpolation=nearest)
    if name == "TranslateY":
        return F.affine(image, angle=0.0,
                        translate=[0, int(magnitude * height)], scale=1.0,
                        shear=[0.0, 0.0], interpolation=nearest)
    if name == "Rotate":
        return F.rotate(image, magnitude, interpolation=nearest)
    if name == "Posterize":
        return _from_uint8(F.posterize(_to_uint8(image), int(magnitude)),
                           image.dtype)
    if name == "Solarize":
        return F.solarize(image, magnitude)
    if name == "AutoContrast":
        return F.autocontrast(image)
    if name == "Equalize":
        return _from_uint8(F.equalize(_to_uint8(image)), image.dtype)
    if name == "Brightness":
        return F.adjust_brightness(image, 1.0 + magnitude)
    if name == "Color":
        return F.adjust_saturation(image, 1.0 + magnitude)
    if name == "Contrast":
        return F.adjust_contrast(image, 1.0 + magnitude)
    if name == "Sharpness":
        return F.adjust_sharpness(image, 1.0 + magnitude)
    raise ConfigError(f"Unknown AugMix op '{name}'")


def _sample_magnitude(name: str, severity: int,
                      rng: np.random.Generator) -> float:
    bins_fn, signed = _OP_SPACE[name]
    if bins_fn is None:
        return 0.0
    magnitude = float(bins_fn()[int(rng.integers(severity))])
    if signed and rng.random() <= 0.5:
        magnitude = -magnitude
    return magnitude


def sample_recipe(config: AugmentConfig,
                  rng: np.random.Generator) -> AugMixRecipe:
    """
    Draw an AugMix recipe.

    Args:
        config: Width, depth range, concentration, severity and palette
        rng: numpy Generator; the recipe is a pure function of its state

    Returns:
        A validated AugMixRecipe

    Raises:
        ConfigError: For an empty palette or unknown op names
    """
    palette = tuple(config.augmix_ops)
    if not palette:
        raise ConfigError("The AugMix op palette is empty.")
    unknown = [name for name in palette if name not in _OP_SPACE]
    if unknown:
        raise ConfigError(f"Unknown AugMix ops: {', '.join(unknown)}")

    width = config.augmix_width
    low, high = config.augmix_depth
    if not 1 <= low <= high:
        raise ConfigError(f"Invalid AugMix depth range ({low}, {high})")
    alpha = config.augmix_alpha
    weights = rng.dirichlet([alpha] * width)
    # Renormalize in float64 so the simplex check is exact enough.
    weights = tuple(float(w) for w in weights / weights.sum())
    skip = float(rng.beta(alpha, alpha))

    chains = []
    for _ in range(width):
        depth = int(rng.integers(low, high + 1))
        steps = []
        for _ in range(depth):
            name = palette[int(rng.integers(len(palette)))]
            steps.append(
                (name, _sample_magnitude(name, config.augmix_severity, rng)))
        chains.append(tuple(steps))

    return AugMixRecipe(
        width=width,
        depth=(low, high),
        weights=weights,
        skip=skip,
        palette=palette,
        severity=config.augmix_severity,
        chains=tuple(chains),
    )


def augmix_view(image: Tensor, recipe: AugMixRecipe,
                config: Optional[AugmentConfig] = None) -> Tensor:
    """
    Mix an image with its augmentation chains.

    x2 = (1 - m) * x + m * sum_i w_i * chain_i(x), clipped to [0, 1].

    Args:
        image: (3, H, W) tensor in [0, 1]
        recipe: The drawn mixture
        config: Used only for input validation

    Returns:
        (3, H, W) tensor in [0, 1]
    """
    check_image(image, config or AugmentConfig())
    mix = torch.zeros_like(image)
    for weight, chain in zip(recipe.weights, recipe.chains):
        augmented = image
        for name, magnitude in chain:
            augmented = apply_op(augmented, name, magnitude)
        mix = mix + weight * augmented
    mixed = (1.0 - recipe.skip) * image + recipe.skip * mix
    return mixed.clamp(0.0, 1.0)
