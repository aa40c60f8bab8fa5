"""
The prompt-learning model: frozen encoders plus the trainable pieces.

``PromptSSLModel`` wires the frozen vision and text encoders to the FRG
layer, the meta-network rho and the vision projector P_v, and computes
the per-branch quantities every objective needs.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import torch
from torch import Tensor, nn

from promptssl.backbone import (
    TextBackbone,
    VisionBackbone,
    build_backbones,
    embed_class_names,
)
from promptssl.backbone.common import FeatureStack
from promptssl.common import ConfigError
from promptssl.config import LossConfig, RunConfig, Settings
from promptssl.features import (
    FRG,
    content_features,
    seed_width,
    style_features,
)
from promptssl.losses import (
    cosine_logits,
    cross_entropy_loss,
    nt_xent,
    prompt_consistency_loss,
    total_loss,
)
from promptssl.losses.common import LossReport, PosteriorRow
from promptssl.projectors import VisionProjector, project
from promptssl.prompts import MetaNetwork, PromptInit, encode_class_prompts
from promptssl.utils.seeding import derive_seed, torch_seeded

logger = logging.getLogger(__name__)


class PromptSSLModel(nn.Module):
    """Frozen dual encoder with a trainable prompt generator."""

    def __init__(self, vision: VisionBackbone, text: TextBackbone,
                 config: RunConfig):
        super().__init__()
        self.vision = vision
        self.text = text
        self.content_layers = config.features.content_layers
        self.std_epsilon = config.features.std_epsilon
        self.loss_config = config.loss

        for index in self.content_layers or ():
            if not 0 <= index < vision.layer_count:
                raise ConfigError(
                    f"features.content_layers entry {index} outside "
                    f"[0, {vision.layer_count})")
        in_width = seed_width(vision.per_layer_dims, self.content_layers)
        self.frg = FRG(
            in_width,
            config.features.d_seed,
            mode=config.features.frg_mode,
            trainable=config.features.frg_trainable,
            seed=config.features.frg_seed,
        )

        init = PromptInit(config.rho.init)
        template = None
        if init is PromptInit.MANUAL:
            with torch.no_grad():
                template = text.embed_words(config.rho.template)
        self.rho = MetaNetwork(
            d_seed=config.features.d_seed,
            embed_dim=text.embed_dim,
            context_length=config.rho.context_length,
            hidden_width=config.rho.hidden_width,
            base_width=config.rho.base_width,
            init=init,
            template_tokens=template,
        )

        d_joint = config.pv.d_joint or text.output_dim
        if d_joint != text.output_dim:
            raise ConfigError(
                f"pv.d_joint ({d_joint}) must equal the text encoder "
                f"output width ({text.output_dim})")
        self.pv = VisionProjector(
            vision.output_dim, d_joint,
            bn_momentum=config.pv.bn_momentum,
            bn_eps=config.pv.bn_eps,
        )

    @property
    def temperature(self) -> float:
        if self.loss_config.temperature is not None:
            return self.loss_config.temperature
        return self.text.temperature

    @property
    def image_size(self) -> int:
        return self.vision.image_size

    @property
    def normalization(self) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
        return tuple(self.vision.mean), tuple(self.vision.std)

    def normalize(self, images: Tensor) -> Tensor:
        return self.vision.normalize(images)

    def trainable_parameters(self) -> List[nn.Parameter]:
        """Parameters the optimizer may update: rho, P_v, trainable FRG."""
        params = list(self.rho.parameters()) + list(self.pv.parameters())
        if self.frg.trainable:
            params.append(self.frg.weight)
        return params

    def class_tokens(self, class_names: Sequence[str]) -> List[Tensor]:
        return embed_class_names(self.text, class_names)

    def _encode(self, images: Tensor) -> Tuple[FeatureStack, Tensor]:
        stack = self.vision.encode_image(images)
        content = content_features(stack, self.content_layers)
        style = style_features(stack, self.std_epsilon)
        return stack, self.frg(content, style)

    def prompt_seed(self, images: Tensor) -> Tensor:
        """(B, d_seed) prompt seeds for normalized images."""
        return self._encode(images)[1]

    def prompt_embeddings(self, seed: Tensor,
                          class_tokens: Sequence[Tensor]) -> Tensor:
        """(B, K, D) text embeddings of every class prompt per image."""
        return encode_class_prompts(self.text, self.rho(seed), class_tokens)

    def forward_losses(
        self,
        x: Tensor,
        x1: Tensor,
        x2: Tensor,
        class_tokens: Sequence[Tensor],
        labels: Tensor,
        loss_config: Optional[LossConfig] = None,
    ) -> Tuple[LossReport, Tensor]:
        """
        Compute every enabled objective on one batch of triplets.

        Args:
            x, x1, x2: (B, 3, S, S) normalized images and their views
            class_tokens: Class-name embeddings of the seen label set
            labels: (B,) positions in the seen label set
            loss_config: Term toggles; the model's own when None

        Returns:
            Tuple of the LossReport and the detached (B, K) logits of x
        """
        config = loss_config or self.loss_config
        tau = self.temperature
        batch = x.shape[0]

        stack_x, seed_x = self._encode(x)
        stack_x1, seed_x1 = self._encode(x1)
        # One pass over [x; x1] so both views share batch statistics.
        z = project(
            self.pv,
            torch.cat([stack_x.final_pooled, stack_x1.final_pooled]),
            mode="train" if self.training else "eval",
        )
        z_x, z_x1 = z[:batch], z[batch:]

        e_x = self.prompt_embeddings(seed_x, class_tokens)
        logits = cosine_logits(z_x, e_x, tau)

        l_con = nt_xent(z_x, z_x1, tau) if config.enable_con else None
        l_ce = None
        if config.enable_ce:
            l_ce = cross_entropy_loss(PosteriorRow.from_logits(logits),
                                      labels)
        l_sem = None
        if config.enable_sem:
            e_x1 = e_x2 = e_x
            if config.sem_use_x1:
                e_x1 = self.prompt_embeddings(seed_x1, class_tokens)
            if config.sem_use_x2:
                e_x2 = self.prompt_embeddings(self._encode(x2)[1],
                                              class_tokens)
            l_sem = prompt_consistency_loss(
                e_x, e_x1, e_x2,
                use_x1=config.sem_use_x1, use_x2=config.sem_use_x2)

        report = total_loss(l_con, l_ce, l_sem, config,
                            batch_size=batch, temperature=tau)
        return report, logits.detach()

    def logits(self, images: Tensor,
               class_tokens: Sequence[Tensor]) -> Tensor:
        """(B, K) eval-mode logits of normalized images."""
        stack, seed = self._encode(images)
        z = project(self.pv, stack.final_pooled, mode="eval")
        return cosine_logits(z, self.prompt_embeddings(seed, class_tokens),
                             self.temperature)

    def trainable_state(self) -> dict:
        """State of the pieces a checkpoint has to carry."""
        return {
            "rho": self.rho.state_dict(),
            "pv": self.pv.state_dict(),
            "frg": self.frg.state_dict(),
        }

    def load_trainable_state(self, state: dict) -> None:
        self.rho.load_state_dict(state["rho"])
        self.pv.load_state_dict(state["pv"])
        self.frg.load_state_dict(state["frg"])


def build_model(config: RunConfig, settings: Optional[Settings] = None,
                seed: Optional[int] = None) -> PromptSSLModel:
    """
    Build the backbones and a freshly initialized model.

    Args:
        config: Resolved run configuration
        settings: Environment settings for the pretrained-weight cache
        seed: Run seed the trainable initialization derives from;
            ``config.seed`` when None

    Returns:
        PromptSSLModel on the configured device
    """
    vision, text = build_backbones(config.backbone, settings)
    run_seed = config.seed if seed is None else seed
    with torch_seeded(derive_seed(run_seed, "init")):
        model = PromptSSLModel(vision, text, config)
    logger.debug("Built model with %d trainable tensors",
                 len(model.trainable_parameters()))
    return model.to(config.train.device)
