# Inference, metrics and result files
from promptssl.evaluation.common import EvalResult, EvaluationError, Scorer
from promptssl.evaluation.metrics import (
    accuracy,
    aggregate_b2n,
    harmonic_mean,
    per_class_accuracy,
)
from promptssl.evaluation.protocols import (
    argmax_lowest,
    average_results,
    evaluate_label_set,
    predict,
    run_protocol,
    score_samples,
)
from promptssl.evaluation.reporting import (
    format_results_table,
    results_payload,
    write_results,
)
from promptssl.evaluation.zero_shot import ZeroShotScorer

__all__ = [
    "EvalResult",
    "EvaluationError",
    "Scorer",
    "ZeroShotScorer",
    "accuracy",
    "aggregate_b2n",
    "argmax_lowest",
    "average_results",
    "evaluate_label_set",
    "format_results_table",
    "harmonic_mean",
    "per_class_accuracy",
    "predict",
    "results_payload",
    "run_protocol",
    "score_samples",
    "write_results",
]
