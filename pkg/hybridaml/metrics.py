"""
Binary classification metrics: confusion counts at a threshold, accuracy,
precision, recall, F1, and rank-based ROC-AUC.

Zero-division convention: precision, recall and F1 are 0 whenever their
denominator is 0. A score equal to the threshold is predicted positive.
"""

from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats

from hybridaml.exceptions import EvaluationError, MetricInputError

DEFAULT_THRESHOLD = 0.5


class Confusion(NamedTuple):
    tp: int
    fp: int
    tn: int
    fn: int


class MetricsReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    # None when the evaluated labels contain a single class.
    auc: Optional[float]
    threshold: float = DEFAULT_THRESHOLD
    n_pos: int
    n_neg: int
    split: str = "test"
    seed: Optional[int] = None
    mode: Optional[str] = None
    epochs: Optional[int] = None


def _binary_inputs(
    scores: Sequence[float], labels: Sequence[int]
) -> Tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape:
        raise MetricInputError(
            f"scores and labels differ in length ({len(s)} != {len(y)})"
        )
    if not np.all(np.isin(y, (0, 1))):
        raise MetricInputError("labels must be 0 or 1")
    if not np.all(np.isfinite(s)):
        raise MetricInputError("scores must be finite")
    return s, y.astype(bool)


def confusion(
    probs: Sequence[float],
    labels: Sequence[int],
    threshold: float = DEFAULT_THRESHOLD,
) -> Confusion:
    p, y = _binary_inputs(probs, labels)
    predicted = p >= threshold
    return Confusion(
        tp=int(np.sum(predicted & y)),
        fp=int(np.sum(predicted & ~y)),
        tn=int(np.sum(~predicted & ~y)),
        fn=int(np.sum(~predicted & y)),
    )


def prf1(tp: int, fp: int, tn: int, fn: int) -> Tuple[float, float, float, float]:
    """Return `(accuracy, precision, recall, f1)`."""
    if min(tp, fp, tn, fn) < 0:
        raise MetricInputError("confusion counts must be non-negative")
    total = tp + fp + tn + fn
    if total == 0:
        raise MetricInputError("confusion counts are all zero")
    accuracy = (tp + tn) / total
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return accuracy, precision, recall, 0.0
    f1 = 2 * precision * recall / (precision + recall)
    return accuracy, precision, recall, f1


def mann_whitney_u(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Number of (positive, negative) pairs ranked correctly, ties counting 1/2,
    from average ranks in O(n log n).
    """
    s, y = _binary_inputs(scores, labels)
    n_pos = int(y.sum())
    ranks = stats.rankdata(s, method="average")
    return float(ranks[y].sum() - n_pos * (n_pos + 1) / 2.0)


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    # Not clamped to [0.5, 1]: worse-than-chance rankings are reported as is.
    s, y = _binary_inputs(scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("ROC-AUC is undefined for single-class labels")
    return mann_whitney_u(s, y.astype(np.int8)) / (n_pos * n_neg)


def evaluate_predictions(
    probs: Sequence[float],
    labels: Sequence[int],
    threshold: float = DEFAULT_THRESHOLD,
    *,
    split: str = "test",
    seed: Optional[int] = None,
    mode: Optional[str] = None,
    epochs: Optional[int] = None,
) -> MetricsReport:
    counts = confusion(probs, labels, threshold)
    accuracy, precision, recall, f1 = prf1(*counts)
    n_pos = counts.tp + counts.fn
    n_neg = counts.tn + counts.fp
    auc = roc_auc(probs, labels) if n_pos and n_neg else None
    return MetricsReport(
        tp=counts.tp,
        fp=counts.fp,
        tn=counts.tn,
        fn=counts.fn,
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        auc=auc,
        threshold=threshold,
        n_pos=n_pos,
        n_neg=n_neg,
        split=split,
        seed=seed,
        mode=mode,
        epochs=epochs,
    )
