# Content/style feature package
from promptssl.features.common import FeatureError, StyleVector
from promptssl.features.extraction import (
    FRG,
    content_features,
    frg,
    seed_width,
    style_features,
)

__all__ = [
    "FRG",
    "FeatureError",
    "StyleVector",
    "content_features",
    "frg",
    "seed_width",
    "style_features",
]
