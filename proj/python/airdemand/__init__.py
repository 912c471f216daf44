"""Air-taxi demand level classification pipeline."""

from airdemand._core import (
    evaluate_predictions,
    fit,
    kmeans,
    permutation_importance,
    predict,
    predict_proba,
    run,
)

__all__ = [
    "evaluate_predictions",
    "fit",
    "kmeans",
    "permutation_importance",
    "predict",
    "predict_proba",
    "run",
]
