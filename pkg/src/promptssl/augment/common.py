"""
Common types for the augmentation pipeline.
"""
import math
from dataclasses import dataclass
from typing import Tuple

from torch import Tensor

from promptssl.common import ConfigError, PromptSSLError


class AugmentError(PromptSSLError):
    """Exception raised for images the pipeline cannot process."""
    pass


@dataclass(frozen=True)
class AugmentedTriplet:
    """An image with its geometric view x1 and compositional view x2."""

    x: Tensor
    x1: Tensor
    x2: Tensor
    seed: int


ChainStep = Tuple[str, float]


@dataclass(frozen=True)
class AugMixRecipe:
    """
    A fully drawn AugMix mixture.

    ``chains`` holds one tuple of (op name, magnitude) steps per chain;
    ``weights`` are the chain mixing weights on the simplex and ``skip``
    is the weight m of the mixed branch against the original image.
    """

    width: int
    depth: Tuple[int, int]
    weights: Tuple[float, ...]
    skip: float
    palette: Tuple[str, ...]
    severity: int
    chains: Tuple[Tuple[ChainStep, ...], ...]

    def __post_init__(self):
        if not self.palette:
            raise ConfigError("The AugMix op palette is empty.")
        if self.width < 1:
            raise ConfigError("AugMix needs at least one chain.")
        if len(self.weights) != self.width or len(self.chains) != self.width:
            raise ConfigError(
                f"Recipe declares width {self.width} but has "
                f"{len(self.weights)} weights and {len(self.chains)} chains")
        if any(w < 0 for w in self.weights) or not math.isclose(
                sum(self.weights), 1.0, abs_tol=1e-6):
            raise ConfigError(
                f"Mixing weights {self.weights} are not on the simplex")
        if not 0.0 <= self.skip <= 1.0:
            raise ConfigError(f"Skip weight {self.skip} outside [0, 1]")
        for chain in self.chains:
            for name, _ in chain:
                if name not in self.palette:
                    raise ConfigError(
                        f"Chain op '{name}' is not in the palette")
