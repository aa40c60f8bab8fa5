"""
The vision projector P_v: one affine map into the joint space followed
by batch normalization.
"""
import logging

from torch import Tensor, nn

from promptssl.projectors.common import ProjectorError

logger = logging.getLogger(__name__)


class VisionProjector(nn.Module):
    """Linear(output_dim -> d_joint) + BatchNorm1d(d_joint)."""

    def __init__(self, in_dim: int, d_joint: int,
                 bn_momentum: float = 0.1, bn_eps: float = 1e-5):
        super().__init__()
        self.in_dim = in_dim
        self.d_joint = d_joint
        self.linear = nn.Linear(in_dim, d_joint)
        self.norm = nn.BatchNorm1d(d_joint, eps=bn_eps,
                                   momentum=bn_momentum)

    @property
    def has_statistics(self) -> bool:
        return int(self.norm.num_batches_tracked) > 0

    def forward(self, features: Tensor) -> Tensor:
        if features.shape[-1] != self.in_dim:
            raise ProjectorError(
                f"Projector expects width {self.in_dim}, got "
                f"{features.shape[-1]}")
        if self.training and features.shape[0] < 2:
            raise ProjectorError(
                "Train-mode projection needs at least 2 samples for "
                "batch statistics")
        if not self.training and not self.has_statistics:
            logger.warning(
                "Projecting in eval mode before any train batch; using "
                "identity normalization statistics")
        return self.norm(self.linear(features))


def project(pv: VisionProjector, final_pooled: Tensor,
            mode: str = "eval") -> Tensor:
    """
    Map pooled visual features into the joint space.

    Args:
        pv: The projector
        final_pooled: (B, output_dim) visual features
        mode: "train" updates normalization statistics from the batch,
            "eval" uses the running statistics

    Returns:
        (B, d_joint) joint-space embeddings
    """
    if mode not in ("train", "eval"):
        raise ProjectorError(f"Unknown projection mode '{mode}'")
    was_training = pv.training
    pv.train(mode == "train")
    try:
        return pv(final_pooled)
    finally:
        pv.train(was_training)
