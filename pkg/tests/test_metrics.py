from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aquaduct.ids.metrics import (
    ConfusionMatrix,
    confusion_from_predictions,
    metrics_from_confusion,
)


def test_worked_example_by_hand():
    # 100 flows: 6 attacks caught, 4 missed, 2 false alarms, 88 clean
    metrics = metrics_from_confusion(ConfusionMatrix(tp=6, tn=88, fp=2, fn=4))
    assert metrics.accuracy == pytest.approx(94.0)
    assert metrics.far == pytest.approx(100.0 * 2 / 90)
    assert metrics.und == pytest.approx(40.0)


def test_perfect_detector():
    metrics = metrics_from_confusion(ConfusionMatrix(tp=10, tn=90, fp=0, fn=0))
    assert (metrics.accuracy, metrics.far, metrics.und) == (100.0, 0.0, 0.0)


def test_undefined_rates_are_none_not_zero():
    no_attacks = metrics_from_confusion(ConfusionMatrix(tp=0, tn=50, fp=5, fn=0))
    assert no_attacks.und is None and not no_attacks.und_defined
    assert no_attacks.far == pytest.approx(100.0 * 5 / 55)
    no_normals = metrics_from_confusion(ConfusionMatrix(tp=7, tn=0, fp=0, fn=3))
    assert no_normals.far is None and not no_normals.far_defined
    assert no_normals.und == pytest.approx(30.0)


def test_zero_total_rejected():
    with pytest.raises(ValueError):
        metrics_from_confusion(ConfusionMatrix())


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        ConfusionMatrix(tp=-1)


def test_incremental_add_matches_batch_tally():
    actual = [1, 1, 0, 0, 1, 0, 0, 1, 0, 1]
    predicted = [1, 0, 0, 1, 1, 0, 1, 1, 0, 0]
    cm = ConfusionMatrix()
    for a, p in zip(actual, predicted):
        cm = cm.add(bool(a), bool(p))
    assert cm == confusion_from_predictions(actual, predicted)
    assert (cm.tp, cm.tn, cm.fp, cm.fn) == (3, 3, 2, 2)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        confusion_from_predictions([1, 0], [1])


@given(st.tuples(st.integers(0, 10_000), st.integers(0, 10_000),
                 st.integers(0, 10_000), st.integers(0, 10_000)))
def test_metrics_match_exact_rational_arithmetic(counts):
    tp, tn, fp, fn = counts
    cm = ConfusionMatrix(tp, tn, fp, fn)
    if cm.total == 0:
        return
    metrics = metrics_from_confusion(cm)
    assert abs(metrics.accuracy - float(100 * Fraction(tp + tn, cm.total))) < 1e-9
    if fp + tn:
        assert abs(metrics.far - float(100 * Fraction(fp, fp + tn))) < 1e-9
    else:
        assert metrics.far is None
    if fn + tp:
        assert abs(metrics.und - float(100 * Fraction(fn, fn + tp))) < 1e-9
    else:
        assert metrics.und is None
    assert 0.0 <= metrics.accuracy <= 100.0
