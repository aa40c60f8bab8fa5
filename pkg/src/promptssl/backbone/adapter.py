"""
Adapter for pretrained CLIP-style dual encoders loaded with open_clip.

Only the per-layer taps of the vision transformer and the continuous
prompt entry point of the text transformer are touched; everything else
is the pretrained model as shipped.
"""
import logging
import math
from typing import Any, List, Optional, Sequence, Tuple

import torch
from torch import Tensor

from promptssl.backbone.common import (
    BackboneError,
    TextBackbone,
    VisionBackbone,
)
from promptssl.common import ConfigError

logger = logging.getLogger(__name__)

CLIP_MEAN = (0.48145466, 0.4578275, 0.40821073)
CLIP_STD = (0.26862954, 0.26130258, 0.27577711)


def _to_batch_first(x: Tensor, batch_first: bool) -> Tensor:
    return x if batch_first else x.permute(1, 0, 2)


class ClipVisionAdapter(VisionBackbone):
    """Taps every (or a chosen subset of) residual block outputs."""

    def __init__(self, clip_model: Any,
                 layer_taps: Optional[Sequence[int]] = None):
        super().__init__()
        visual = clip_model.visual
        self.visual = visual
        blocks = visual.transformer.resblocks
        taps = list(layer_taps) if layer_taps else list(range(len(blocks)))
        if any(t < 0 or t >= len(blocks) for t in taps):
            raise ConfigError(
                f"Layer taps {taps} outside [0, {len(blocks)})")
        self.taps = sorted(set(taps))
        width = visual.transformer.width
        self.layer_count = len(self.taps)
        self.per_layer_dims = [width] * self.layer_count
        self.output_dim = int(visual.output_dim)
        image_size = visual.image_size
        if isinstance(image_size, (tuple, list)):
            image_size = image_size[0]
        self.image_size = int(image_size)
        self.mean = tuple(getattr(visual, "image_mean", None) or CLIP_MEAN)
        self.std = tuple(getattr(visual, "image_std", None) or CLIP_STD)
        self.freeze()

    def _forward_taps(self,
                      images: Tensor) -> Tuple[List[Tensor], Tensor]:
        visual = self.visual
        dtype = visual.conv1.weight.dtype
        x = visual.conv1(images.to(dtype))
        x = x.reshape(x.shape[0], x.shape[1], -1).permute(0, 2, 1)
        cls = visual.class_embedding.to(x.dtype) + torch.zeros(
            x.shape[0], 1, x.shape[-1], dtype=x.dtype, device=x.device)
        x = torch.cat([cls, x], dim=1)
        x = x + visual.positional_embedding.to(x.dtype)
        x = visual.ln_pre(x)

        batch_first = getattr(visual.transformer, "batch_first", False)
        x = _to_batch_first(x, batch_first)
        maps = []
        for index, block in enumerate(visual.transformer.resblocks):
            x = block(x)
            if index in self.taps:
                tokens = _to_batch_first(x, batch_first)
                maps.append(tokens.permute(0, 2, 1).float())
        x = _to_batch_first(x, batch_first)
        pooled = visual.ln_post(x[:, 0, :])
        if visual.proj is not None:
            pooled = pooled @ visual.proj
        return maps, pooled.float()


class ClipTextAdapter(TextBackbone):
    """
    Feeds continuous prompts through the pretrained text transformer.

    The adapter wraps each prompt in the start and end tokens itself, so
    the usable capacity is the model context length minus two.
    """

    def __init__(self, clip_model: Any, tokenizer: Any):
        super().__init__()
        self.token_embedding = clip_model.token_embedding
        self.positional_embedding = clip_model.positional_embedding
        self.transformer = clip_model.transformer
        self.ln_final = clip_model.ln_final
        self.text_projection = clip_model.text_projection
        self.register_buffer("attn_mask", clip_model.attn_mask,
                             persistent=False)
        self.logit_scale = clip_model.logit_scale
        self.tokenizer = tokenizer

        self.model_context = int(self.positional_embedding.shape[0])
        self.context_capacity = self.model_context - 2
        self.embed_dim = int(self.token_embedding.embedding_dim)
        projection = self.text_projection
        if isinstance(projection, torch.nn.Linear):
            self.output_dim = int(projection.out_features)
        else:
            self.output_dim = int(projection.shape[1])
        ids = self._tokenize("")
        self.sot_id = int(ids[0])
        self.eot_id = int(ids[1])
        self.freeze()

    @property
    def temperature(self) -> float:
        return 1.0 / math.exp(float(self.logit_scale.detach()))

    def _tokenize(self, text: str) -> Tensor:
        return self.tokenizer([text])[0]

    def embed_words(self, text: str) -> Tensor:
        ids = self._tokenize(text)
        end = int(ids.argmax())
        inner = ids[1:end]
        if inner.numel() == 0:
            raise BackboneError(f"'{text}' tokenizes to nothing.")
        device = self.token_embedding.weight.device
        with torch.no_grad():
            return self.token_embedding(inner.to(device)).float()

    def _forward_embeddings(self, token_embeddings: Tensor,
                            lengths: Tensor) -> Tensor:
        n_rows = token_embeddings.shape[0]
        device = token_embeddings.device
        dtype = self.token_embedding.weight.dtype
        special = self.token_embedding(torch.tensor(
            [self.sot_id, self.eot_id], device=device)).to(dtype)
        full = torch.zeros(n_rows, self.model_context, self.embed_dim,
                           dtype=dtype, device=device)
        rows = []
        for row in range(n_rows):
            valid = int(lengths[row])
            rows.append(torch.cat([
                special[:1],
                token_embeddings[row, :valid].to(dtype),
                special[1:],
                full[row, valid + 2:],
            ]))
        x = torch.stack(rows) + self.positional_embedding.to(dtype)

        batch_first = getattr(self.transformer, "batch_first", False)
        x = _to_batch_first(x, batch_first)
        x = self.transformer(x, attn_mask=self.attn_mask)
        x = _to_batch_first(x, batch_first)
        x = self.ln_final(x)
        eot_positions = lengths.to(device) + 1
        x = x[torch.arange(n_rows, device=device), eot_positions]
        if isinstance(self.text_projection, torch.nn.Linear):
            x = self.text_projection(x)
        else:
            x = x @ self.text_projection
        return x.float()


def load_clip_backbones(
    model_name: str,
    pretrained: str,
    weights_path: Optional[str] = None,
    layer_taps: Optional[Sequence[int]] = None,
    cache_dir: Optional[str] = None,
) -> Tuple[ClipVisionAdapter, ClipTextAdapter]:
    """
    Load a pretrained model with open_clip and wrap both towers.

    Raises:
        ConfigError: If open_clip is not installed or the model is unknown
    """
    try:
        import open_clip
    except ImportError as e:
        raise ConfigError(
            "backbone.kind=adapter needs the 'clip' extra "
            "(pip install promptssl[clip])") from e

    source = weights_path or pretrained
    logger.info("Loading %s weights from %s", model_name, source)
    try:
        clip_model, _, _ = open_clip.create_model_and_transforms(
            model_name, pretrained=source, cache_dir=cache_dir)
    except Exception as e:
        raise ConfigError(
            f"Cannot load backbone {model_name} ({source}): {e}") from e
    clip_model.eval()
    tokenizer = open_clip.get_tokenizer(model_name)
    return (ClipVisionAdapter(clip_model, layer_taps),
            ClipTextAdapter(clip_model, tokenizer))
