"""
Accuracy and harmonic-mean arithmetic.
"""
from typing import Dict, Sequence, Tuple

import torch
from torch import Tensor

from promptssl.evaluation.common import EvaluationError


def _check_percentage(name: str, value: float) -> None:
    if not 0.0 <= value <= 100.0:
        raise EvaluationError(f"{name} must be in [0, 100], got {value}")


def harmonic_mean(base_acc: float, new_acc: float) -> float:
    """
    Harmonic mean of base and new accuracy: 2bn / (b + n), 0 if both 0.

    Raises:
        EvaluationError: If either accuracy is outside [0, 100]
    """
    _check_percentage("base_acc", base_acc)
    _check_percentage("new_acc", new_acc)
    if base_acc + new_acc == 0:
        return 0.0
    return 2.0 * base_acc * new_acc / (base_acc + new_acc)


def accuracy(predictions: Tensor, labels: Tensor) -> float:
    """Top-1 accuracy in percent."""
    if labels.numel() == 0:
        raise EvaluationError("Accuracy of an empty evaluation set.")
    if predictions.shape != labels.shape:
        raise EvaluationError(
            f"{predictions.numel()} predictions for {labels.numel()} "
            "labels")
    return 100.0 * (predictions == labels).float().mean().item()


def per_class_accuracy(predictions: Tensor, labels: Tensor,
                       class_names: Sequence[str]) -> Dict[str, float]:
    """Accuracy per class present in ``labels``."""
    result = {}
    for index, name in enumerate(class_names):
        mask = labels == index
        if mask.any():
            result[name] = accuracy(predictions[mask], labels[mask])
    return result


def aggregate_b2n(pairs: Sequence[Tuple[float, float]]) -> Dict[str, float]:
    """
    Average base-to-new results over datasets, both ways.

    Returns:
        ``mean_base``, ``mean_new``, ``mean_of_hm`` (average of the
        per-dataset harmonic means) and ``hm_of_means`` (harmonic mean
        of the averaged accuracies)
    """
    if not pairs:
        raise EvaluationError("Nothing to aggregate.")
    bases = torch.tensor([b for b, _ in pairs], dtype=torch.float64)
    news = torch.tensor([n for _, n in pairs], dtype=torch.float64)
    mean_base = bases.mean().item()
    mean_new = news.mean().item()
    return {
        "mean_base": mean_base,
        "mean_new": mean_new,
        "mean_of_hm": sum(harmonic_mean(b, n) for b, n in pairs)
        / len(pairs),
        "hm_of_means": harmonic_mean(mean_base, mean_new),
    }
