"""Confusion-matrix bookkeeping and the three detection metrics.

Positive class is "attack".  Accuracy is correct predictions over all
predictions; the false alarm rate is the share of normal flows flagged
as attacks, FP/(FP+TN); the un-detection rate is the share of attack
flows missed, FN/(FN+TP).  All three are percentages.  A metric whose
denominator is zero is flagged undefined instead of being silently
reported as 0 or 100.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def add(self, actual_attack: bool, predicted_attack: bool) -> "ConfusionMatrix":
        if actual_attack:
            if predicted_attack:
                return ConfusionMatrix(self.tp + 1, self.tn, self.fp, self.fn)
            return ConfusionMatrix(self.tp, self.tn, self.fp, self.fn + 1)
        if predicted_attack:
            return ConfusionMatrix(self.tp, self.tn, self.fp + 1, self.fn)
        return ConfusionMatrix(self.tp, self.tn + 1, self.fp, self.fn)


@dataclass(frozen=True)
class Metrics:
    accuracy: float  # percent
    far: float | None  # percent; None when no normal flows were evaluated
    und: float | None  # percent; None when no attack flows were evaluated

    @property
    def far_defined(self) -> bool:
        return self.far is not None

    @property
    def und_defined(self) -> bool:
        return self.und is not None


def metrics_from_confusion(cm: ConfusionMatrix) -> Metrics:
    if cm.total == 0:
        raise ValueError("cannot compute metrics over zero flows")
    accuracy = 100.0 * (cm.tp + cm.tn) / cm.total
    far = 100.0 * cm.fp / (cm.fp + cm.tn) if cm.fp + cm.tn else None
    und = 100.0 * cm.fn / (cm.fn + cm.tp) if cm.fn + cm.tp else None
    return Metrics(accuracy, far, und)


def confusion_from_predictions(actual, predicted) -> ConfusionMatrix:
    """Tally per-row outcomes; ``actual``/``predicted`` are 0/1 sequences."""
    actual = list(actual)
    predicted = list(predicted)
    if len(actual) != len(predicted):
        raise ValueError("prediction count does not match label count")
    tp = tn = fp = fn = 0
    for a, p in zip(actual, predicted):
        if a and p:
            tp += 1
        elif a:
            fn += 1
        elif p:
            fp += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, tn, fp, fn)
