"""
Teacher-student prompt consistency.

Prompts generated from the original image act as the teacher and are
detached; prompts generated from the augmented views are pulled towards
them.
"""
import torch
from torch import Tensor

from promptssl.common import ConfigError
from promptssl.losses.common import LossError


def _distance(teacher: Tensor, student: Tensor) -> Tensor:
    if student.shape != teacher.shape:
        raise LossError(
            f"Prompt embeddings are not class-aligned: "
            f"{tuple(teacher.shape)} vs {tuple(student.shape)}")
    return torch.linalg.vector_norm(teacher - student, dim=-1)


def prompt_consistency_loss(
    e_x: Tensor,
    e_x1: Tensor,
    e_x2: Tensor,
    use_x1: bool = True,
    use_x2: bool = True,
) -> Tensor:
    """
    L2 distance between teacher and student prompt embeddings.

    Args:
        e_x: (B, K, D) text embeddings of the prompts from x
        e_x1: Same for the geometric view
        e_x2: Same for the compositional view
        use_x1: Include the x1 term
        use_x2: Include the x2 term

    Returns:
        Scalar: per (image, class) sum of the enabled distances,
        averaged over images and classes
    """
    if not (use_x1 or use_x2):
        raise ConfigError("Prompt consistency needs x1 or x2 enabled.")
    teacher = e_x.detach()
    distance = torch.zeros(teacher.shape[:-1], dtype=teacher.dtype,
                           device=teacher.device)
    if use_x1:
        distance = distance + _distance(teacher, e_x1)
    if use_x2:
        distance = distance + _distance(teacher, e_x2)
    return distance.mean()
