"""
Hand-written prompt baseline on the frozen encoders.
"""
from typing import List, Optional, Sequence

import torch
from torch import Tensor

from promptssl.backbone import TextBackbone, VisionBackbone
from promptssl.backbone.common import embed_class_names
from promptssl.losses import cosine_logits
from promptssl.prompts import encode_class_prompts

DEFAULT_TEMPLATE = "a photo of a"


class ZeroShotScorer:
    """Scores images against ``"<template> <class name>"`` prompts."""

    def __init__(self, vision: VisionBackbone, text: TextBackbone,
                 template: str = DEFAULT_TEMPLATE,
                 temperature: Optional[float] = None):
        self.vision = vision
        self.text = text
        self.temperature = temperature or text.temperature
        with torch.no_grad():
            self.template_tokens = text.embed_words(template)

    @property
    def image_size(self) -> int:
        return self.vision.image_size

    def normalize(self, images: Tensor) -> Tensor:
        return self.vision.normalize(images)

    def class_tokens(self, class_names: Sequence[str]) -> List[Tensor]:
        return embed_class_names(self.text, class_names)

    def logits(self, images: Tensor,
               class_tokens: Sequence[Tensor]) -> Tensor:
        with torch.no_grad():
            pooled = self.vision.encode_image(images).final_pooled
            prompts = encode_class_prompts(
                self.text, self.template_tokens.unsqueeze(0), class_tokens)
        return cosine_logits(pooled, prompts[0], self.temperature)
