from fractions import Fraction

import numpy as np
import pytest
from sklearn.metrics import roc_auc_score

from hybridaml.exceptions import EvaluationError, MetricInputError
from hybridaml.metrics import (
    confusion,
    evaluate_predictions,
    mann_whitney_u,
    prf1,
    roc_auc,
)


def brute_force_auc(scores, labels) -> Fraction:
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = Fraction(0)
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1
            elif p == n:
                wins += Fraction(1, 2)
    return wins / (len(pos) * len(neg))


def test_confusion_examples():
    assert confusion([0.9, 0.1], [1, 0], 0.5) == (1, 0, 1, 0)
    # A score equal to the threshold is predicted positive.
    assert confusion([0.5], [0], 0.5) == (0, 1, 0, 0)


def test_confusion_matches_loop_recount(rng):
    probs = rng.random(100)
    labels = rng.integers(0, 2, size=100)
    tp = fp = tn = fn = 0
    for p, y in zip(probs, labels):
        if p >= 0.5:
            tp, fp = (tp + 1, fp) if y == 1 else (tp, fp + 1)
        else:
            tn, fn = (tn + 1, fn) if y == 0 else (tn, fn + 1)
    assert tuple(confusion(probs, labels)) == (tp, fp, tn, fn)


def test_confusion_length_mismatch():
    with pytest.raises(MetricInputError):
        confusion([0.1, 0.2], [1])
    with pytest.raises(ValueError):
        confusion([0.1], [2])


def test_prf1_all_correct():
    assert prf1(5, 0, 5, 0) == (1.0, 1.0, 1.0, 1.0)


def test_prf1_zero_division_conventions():
    accuracy, precision, recall, f1 = prf1(0, 0, 7, 3)
    assert (precision, recall, f1) == (0.0, 0.0, 0.0)
    assert accuracy == pytest.approx(0.7)
    assert prf1(0, 4, 6, 0)[1:] == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("counts", [(0, 0, 0, 0), (1, -1, 0, 0)])
def test_prf1_rejects_invalid_counts(counts):
    with pytest.raises(MetricInputError):
        prf1(*counts)


def test_prf1_fuzzed_grid(rng):
    for _ in range(1000):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 60, size=4))
        if tp + fp + tn + fn == 0:
            continue
        accuracy, precision, recall, f1 = prf1(tp, fp, tn, fn)
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        expected_f1 = 2 * p * r / (p + r) if p + r else 0.0
        assert abs(accuracy - (tp + tn) / (tp + fp + tn + fn)) < 1e-12
        assert abs(precision - p) < 1e-12
        assert abs(recall - r) < 1e-12
        assert abs(f1 - expected_f1) < 1e-12
        for value in (accuracy, precision, recall, f1):
            assert 0.0 <= value <= 1.0
    assert prf1(59, 41, 100, 41)[3] == pytest.approx(
        2 * 0.59 * (59 / 100) / (0.59 + 59 / 100), abs=1e-12
    )


def test_roc_auc_examples():
    assert roc_auc([0.9, 0.1], [1, 0]) == 1.0
    assert roc_auc([0.3, 0.3, 0.3, 0.3], [1, 0, 1, 0]) == 0.5


def test_roc_auc_is_not_clamped():
    assert roc_auc([0.1, 0.9], [1, 0]) == 0.0


def test_roc_auc_single_class():
    with pytest.raises(EvaluationError):
        roc_auc([0.2, 0.4], [1, 1])


def test_roc_auc_equals_all_pairs_count(rng):
    for i in range(100):
        n = int(rng.integers(2, 201))
        labels = rng.integers(0, 2, size=n)
        labels[0], labels[1] = 0, 1
        if i % 2:
            # heavy ties
            scores = rng.integers(0, 5, size=n) / 4.0
        else:
            scores = rng.random(n)
        n_pos = int(labels.sum())
        n_neg = n - n_pos
        u = Fraction(mann_whitney_u(scores, labels))
        assert u / (n_pos * n_neg) == brute_force_auc(scores, labels)


def test_roc_auc_agrees_with_sklearn(rng):
    labels = rng.integers(0, 2, size=300)
    scores = np.round(rng.random(300), 2)
    assert roc_auc(scores, labels) == pytest.approx(
        roc_auc_score(labels, scores), abs=1e-12
    )


def test_roc_auc_rank_invariances(rng):
    labels = rng.integers(0, 2, size=80)
    scores = rng.random(80)
    base = roc_auc(scores, labels)
    assert roc_auc(np.exp(3 * scores) - 7, labels) == pytest.approx(base)
    assert roc_auc(1 - scores, labels) == pytest.approx(1 - base)


def test_evaluate_predictions_report():
    report = evaluate_predictions(
        [0.9, 0.6, 0.4, 0.2], [1, 0, 1, 0], split="val", seed=3, mode="hybrid"
    )
    assert (report.tp, report.fp, report.tn, report.fn) == (1, 1, 1, 1)
    assert report.tp + report.fp + report.tn + report.fn == (
        report.n_pos + report.n_neg
    )
    assert report.accuracy == 0.5
    assert report.auc == 0.75
    assert (report.split, report.seed, report.mode) == ("val", 3, "hybrid")


def test_evaluate_predictions_single_class_has_no_auc():
    report = evaluate_predictions([0.2, 0.7], [0, 0])
    assert report.auc is None
    assert report.n_pos == 0
