"""
Inference and per-protocol evaluation.
"""
import logging
from typing import List, Mapping, Optional, Sequence, Tuple

import torch
from torch import Tensor

from promptssl.dataio import (
    DatasetManifest,
    ProtocolKind,
    ProtocolSplit,
    load_image,
)
from promptssl.evaluation.common import EvalResult, EvaluationError, Scorer
from promptssl.evaluation.metrics import (
    accuracy,
    harmonic_mean,
    per_class_accuracy,
)

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 32
EVAL_SPLIT = "test"


def argmax_lowest(logits: Tensor) -> Tensor:
    """Row-wise argmax; ties resolve to the lowest class id and are logged."""
    best = logits.max(dim=-1, keepdim=True).values
    ties = (logits == best).sum(dim=-1) > 1
    if ties.any():
        logger.warning("%d prediction(s) tied; picking the lowest class id",
                       int(ties.sum()))
    return logits.argmax(dim=-1)


def predict(scorer: Scorer, images: Tensor,
            class_tokens: Sequence[Tensor]) -> Tensor:
    """
    Predicted label-set positions for normalized images.

    Raises:
        EvaluationError: If the label set is empty
    """
    if not class_tokens:
        raise EvaluationError("Cannot predict over an empty label set.")
    single = images.dim() == 3
    if single:
        images = images.unsqueeze(0)
    with torch.no_grad():
        predictions = argmax_lowest(scorer.logits(images, class_tokens))
    return predictions[0] if single else predictions


def score_samples(
    scorer: Scorer,
    manifest: DatasetManifest,
    class_names: Sequence[str],
    split: Optional[str] = EVAL_SPLIT,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> Tuple[Tensor, Tensor]:
    """
    Predict every sample of the label set's classes.

    Only prompts of ``class_names`` are generated; samples of other
    classes are skipped.

    Returns:
        Tuple of (predictions, labels) as label-set positions
    """
    positions = {manifest.class_index(n): i for i, n in enumerate(class_names)}
    sample_ids = [i for i in manifest.indices(split)
                  if manifest.samples[i].class_id in positions]
    if not sample_ids:
        raise EvaluationError(
            f"No '{split}' samples of the requested classes in "
            f"'{manifest.name}'")
    class_tokens = scorer.class_tokens(class_names)
    predictions = []
    for start in range(0, len(sample_ids), batch_size):
        chunk = sample_ids[start:start + batch_size]
        images = torch.stack([
            load_image(manifest.samples[i].path, scorer.image_size)
            for i in chunk])
        predictions.append(
            predict(scorer, scorer.normalize(images), class_tokens).cpu())
    labels = torch.tensor(
        [positions[manifest.samples[i].class_id] for i in sample_ids])
    return torch.cat(predictions), labels


def evaluate_label_set(
    scorer: Scorer,
    manifest: DatasetManifest,
    class_names: Sequence[str],
    protocol: str,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> EvalResult:
    """Top-1 and per-class accuracy over one label set."""
    predictions, labels = score_samples(scorer, manifest, class_names,
                                        batch_size=batch_size)
    return EvalResult(
        protocol=protocol,
        dataset=manifest.name,
        top1=accuracy(predictions, labels),
        per_class=per_class_accuracy(predictions, labels, class_names),
        num_samples=labels.numel(),
    )


def _macro_average(protocol: str,
                   results: Sequence[EvalResult]) -> EvalResult:
    return EvalResult(
        protocol=protocol,
        dataset="average",
        top1=sum(r.top1 for r in results) / len(results),
        num_samples=sum(r.num_samples for r in results),
    )


def run_protocol(
    split: ProtocolSplit,
    scorer: Scorer,
    manifests: Mapping[str, DatasetManifest],
    batch_size: int = DEFAULT_BATCH_SIZE,
    trained_classes: Optional[Sequence[str]] = None,
) -> List[EvalResult]:
    """
    Evaluate a scorer under a protocol.

    Args:
        split: Seen/unseen label sets
        scorer: Trained model or baseline
        manifests: Datasets by name; must hold the source and targets
        batch_size: Images per forward pass
        trained_classes: Classes the scorer was trained on, checked
            against the split

    Returns:
        Base-to-new: one result with base, new and harmonic mean.
        Cross-dataset and domain generalization: the source, one result
        per target, then the macro average over targets. Otherwise one
        top-1 result on the source.

    Raises:
        EvaluationError: For missing datasets or training classes that
            leak into the unseen set
    """
    missing = [n for n in (split.source, *split.targets)
               if n not in manifests]
    if missing:
        raise EvaluationError(f"Datasets not loaded: {', '.join(missing)}")
    if trained_classes is not None:
        trained = set(trained_classes)
        if not trained <= set(split.seen):
            raise EvaluationError(
                "Checkpoint was trained on classes outside the split's "
                f"seen set: {sorted(trained - set(split.seen))}")

    kind = split.kind
    source = manifests[split.source]
    protocol = kind.value
    eval_model = getattr(scorer, "eval", None)
    if callable(eval_model):
        eval_model()

    if kind is ProtocolKind.BASE_TO_NEW:
        base = evaluate_label_set(scorer, source, split.seen, protocol,
                                  batch_size)
        new = evaluate_label_set(scorer, source, split.unseen, protocol,
                                 batch_size)
        return [EvalResult(
            protocol=protocol,
            dataset=source.name,
            base_acc=base.top1,
            new_acc=new.top1,
            harmonic_mean=harmonic_mean(base.top1, new.top1),
            per_class={**base.per_class, **new.per_class},
            num_samples=base.num_samples + new.num_samples,
        )]

    source_result = evaluate_label_set(scorer, source, split.seen,
                                       protocol, batch_size)
    if kind is ProtocolKind.NONE:
        return [source_result]

    target_results = []
    for name in split.targets:
        classes = split.target_classes.get(name)
        if not classes:
            raise EvaluationError(
                f"No evaluable classes for target '{name}'")
        target_results.append(evaluate_label_set(
            scorer, manifests[name], classes, protocol, batch_size))
    return [source_result, *target_results,
            _macro_average(protocol, target_results)]


def _mean(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return sum(present) / len(present) if present else None


def average_results(per_seed: Sequence[Sequence[EvalResult]],
                    seeds: Sequence[int]) -> List[EvalResult]:
    """
    Mean over seeds, keeping every seed's values.

    Base-to-new harmonic means are recomputed from the averaged
    accuracies.
    """
    if not per_seed:
        raise EvaluationError("No per-seed results to average.")
    averaged = []
    for rows in zip(*per_seed):
        first = rows[0]
        base = _mean([r.base_acc for r in rows])
        new = _mean([r.new_acc for r in rows])
        per_class = {
            name: _mean([r.per_class.get(name) for r in rows])
            for name in first.per_class}
        averaged.append(EvalResult(
            protocol=first.protocol,
            dataset=first.dataset,
            top1=_mean([r.top1 for r in rows]),
            base_acc=base,
            new_acc=new,
            harmonic_mean=None if base is None else harmonic_mean(
                base, new),
            per_class=per_class,
            num_samples=first.num_samples,
            per_seed=[{"seed": seed, "top1": r.top1,
                       "base_acc": r.base_acc, "new_acc": r.new_acc,
                       "harmonic_mean": r.harmonic_mean}
                      for seed, r in zip(seeds, rows)],
        ))
    return averaged
