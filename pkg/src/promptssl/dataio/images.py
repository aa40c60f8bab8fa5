"""
Image decoding, preprocessing and the synthetic toy images.
"""
import math
import zlib
from pathlib import Path

import numpy as np
import torch
import torchvision.transforms as T
from PIL import Image, UnidentifiedImageError
from torch import Tensor

from promptssl.dataio.common import DatasetError

SYNTHETIC_SCHEME = "toy://"

# RGB base colour per class index.
_PALETTE = (
    (0.85, 0.15, 0.15),
    (0.15, 0.25, 0.85),
    (0.15, 0.75, 0.20),
    (0.90, 0.80, 0.10),
)


def synthetic_path(dataset: str, class_id: int, index: int,
                   domain: str = "base") -> str:
    return f"{SYNTHETIC_SCHEME}{dataset}/{domain}/{class_id}/{index}"


def _pattern(class_id: int, size: int) -> np.ndarray:
    coords = np.arange(size, dtype=np.float64)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    period = max(2.0, size / 4.0)
    kind = class_id % 4
    if kind == 0:
        wave = np.sin(2 * math.pi * yy / period)
    elif kind == 1:
        wave = np.sin(2 * math.pi * xx / period)
    elif kind == 2:
        wave = np.sin(2 * math.pi * yy / period) * np.sin(
            2 * math.pi * xx / period)
    else:
        wave = np.sin(2 * math.pi * (xx + yy) / period)
    return 0.5 + 0.5 * wave


def synthesize_image(path: str, size: int) -> Tensor:
    """
    Render a synthetic toy image from its ``toy://`` path.

    Each class has its own colour and stripe pattern; the ``shifted``
    domain desaturates and brightens the colours. The noise is a pure
    function of the path.
    """
    try:
        dataset, domain, class_part, index_part = path[
            len(SYNTHETIC_SCHEME):].split("/")
        class_id, index = int(class_part), int(index_part)
    except ValueError:
        raise DatasetError(
            f"Malformed synthetic image path '{path}'") from None

    rng = np.random.default_rng(zlib.crc32(path.encode("utf-8")))
    colour = np.array(_PALETTE[class_id % len(_PALETTE)])
    if domain == "shifted":
        colour = 0.5 * colour + 0.35
    pattern = _pattern(class_id, size)
    image = colour[:, None, None] * (0.55 + 0.45 * pattern[None])
    image = image + rng.normal(0.0, 0.04, size=(3, size, size))
    return torch.from_numpy(np.clip(image, 0.0, 1.0)).float()


def preprocess(image: Image.Image, size: int) -> Tensor:
    """Resize the short side, center-crop and convert to [0, 1]."""
    transform = T.Compose([
        T.Resize(size, antialias=True),
        T.CenterCrop(size),
        T.PILToTensor(),
    ])
    return transform(image.convert("RGB")).float() / 255.0


def load_image(path: str, size: int) -> Tensor:
    """
    Load one sample as an unnormalized (3, size, size) tensor in [0, 1].

    Raises:
        DatasetError: If the file cannot be read or decoded
    """
    if path.startswith(SYNTHETIC_SCHEME):
        return synthesize_image(path, size)
    try:
        with Image.open(Path(path)) as image:
            return preprocess(image, size)
    except (OSError, UnidentifiedImageError) as e:
        raise DatasetError(f"Cannot read image {path}: {e}") from e
