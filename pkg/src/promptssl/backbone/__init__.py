# Frozen dual-encoder backbone package
from typing import Optional, Tuple

from promptssl.backbone.common import (
    BackboneError,
    FeatureStack,
    TextBackbone,
    VisionBackbone,
    embed_class_name,
    embed_class_names,
    encode_image,
    encode_text,
)
from promptssl.backbone.toy import ToyTextBackbone, ToyVisionBackbone
from promptssl.config import BackboneConfig, Settings

__all__ = [
    "BackboneError",
    "FeatureStack",
    "TextBackbone",
    "ToyTextBackbone",
    "ToyVisionBackbone",
    "VisionBackbone",
    "build_backbones",
    "embed_class_name",
    "embed_class_names",
    "encode_image",
    "encode_text",
]


def build_backbones(
    config: BackboneConfig, settings: Optional[Settings] = None
) -> Tuple[VisionBackbone, TextBackbone]:
    """
    Build the frozen vision and text encoders selected by the config.

    Args:
        config: The ``backbone`` section of a RunConfig
        settings: Environment settings (cache directory for weights)

    Returns:
        Tuple of (vision backbone, text backbone)
    """
    if config.kind == "toy":
        vision = ToyVisionBackbone(
            layer_dims=config.toy_layer_dims,
            image_size=config.toy_image_size,
            output_dim=config.toy_embed_dim,
            seed=config.toy_seed,
        )
        text = ToyTextBackbone(
            embed_dim=config.toy_embed_dim,
            output_dim=config.toy_embed_dim,
            context_capacity=config.toy_context_capacity,
            seed=config.toy_seed,
        )
        return vision, text

    from promptssl.backbone.adapter import load_clip_backbones

    cache_dir = str(settings.cache_root) if settings else None
    return load_clip_backbones(
        config.model_name,
        config.pretrained,
        weights_path=config.weights_path,
        layer_taps=config.layer_taps,
        cache_dir=cache_dir,
    )
