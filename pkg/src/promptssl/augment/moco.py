"""
MoCo-v3-style geometric/photometric view.

Random resized crop, horizontal flip, colour jitter, grayscale, Gaussian
blur and solarization, all drawn from the torch RNG seeded per call.
"""
from typing import List

import torch
import torchvision.transforms as T
from torch import Tensor

from promptssl.augment.common import AugmentError
from promptssl.config import AugmentConfig
from promptssl.utils.seeding import torch_seeded


def check_image(image: Tensor, config: AugmentConfig) -> None:
    """
    Validate an unnormalized (3, H, W) image in [0, 1].

    Raises:
        AugmentError: On wrong rank/channels or a side below the minimum
    """
    if image.dim() != 3 or image.shape[0] != 3:
        raise AugmentError(
            f"Expected a (3, H, W) image, got {tuple(image.shape)}")
    height, width = image.shape[1:]
    if min(height, width) < config.min_image_size:
        raise AugmentError(
            f"Image {height}x{width} is smaller than the crop minimum "
            f"{config.min_image_size}")


def _blur_kernel(side: int) -> int:
    kernel = max(3, int(0.1 * side))
    return kernel if kernel % 2 == 1 else kernel + 1


def build_moco_transform(config: AugmentConfig, height: int,
                         width: int) -> T.Compose:
    """Compose the view pipeline for a given output size."""
    ops: List[torch.nn.Module] = []
    if tuple(config.crop_scale) != (1.0, 1.0):
        ops.append(T.RandomResizedCrop(
            (height, width), scale=tuple(config.crop_scale), antialias=True))
    ops.append(T.RandomHorizontalFlip(p=config.flip_p))
    ops.append(T.RandomApply([T.ColorJitter(
        brightness=config.jitter_brightness,
        contrast=config.jitter_contrast,
        saturation=config.jitter_saturation,
        hue=config.jitter_hue,
    )], p=config.jitter_p))
    ops.append(T.RandomGrayscale(p=config.grayscale_p))
    ops.append(T.RandomApply([T.GaussianBlur(
        kernel_size=_blur_kernel(min(height, width)),
        sigma=tuple(config.blur_sigma),
    )], p=config.blur_p))
    ops.append(T.RandomSolarize(threshold=0.5, p=config.solarize_p))
    return T.Compose(ops)


def moco_view(image: Tensor, seed: int, config: AugmentConfig) -> Tensor:
    """
    Draw the geometric view x1 of an unnormalized image.

    Args:
        image: (3, H, W) tensor in [0, 1]
        seed: Seed for every random choice of the pipeline
        config: Augmentation probabilities and strengths

    Returns:
        (3, H, W) tensor in [0, 1]
    """
    check_image(image, config)
    transform = build_moco_transform(config, *image.shape[1:])
    with torch_seeded(seed):
        view = transform(image)
    return view.clamp(0.0, 1.0)
