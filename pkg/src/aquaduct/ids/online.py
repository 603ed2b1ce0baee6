"""Live-stream detection against closed flow records.

Each model consumes labeled flows as they close, predicts on the
features alone, and emits an alert for every attack prediction; the
ground-truth label only feeds the running confusion matrix used to
score the deployment afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..flows import LABEL_ATTACK, LabeledFlow
from .metrics import ConfusionMatrix, Metrics, metrics_from_confusion
from .models import TrainedModel


@dataclass(frozen=True)
class Alert:
    ts: float
    model: str
    sport: int
    tot_pkts: int
    tot_bytes: int
    src: str = ""
    dst: str = ""


class OnlineDetector:
    """Single-consumer stream processor for one deployed model."""

    def __init__(self, model: TrainedModel):
        self.model = model
        self.confusion = ConfusionMatrix()
        self.alerts: list[Alert] = []

    def observe(self, flow: LabeledFlow) -> Alert | None:
        x = np.asarray(flow.features.as_tuple(), dtype=np.float64).reshape(1, -1)
        predicted_attack = bool(self.model.predict_many(x)[0])
        actual_attack = flow.label == LABEL_ATTACK
        self.confusion = self.confusion.add(actual_attack, predicted_attack)
        if not predicted_attack:
            return None
        record = flow.record
        alert = Alert(
            ts=record.last_ts if record else 0.0,
            model=self.model.algorithm,
            sport=flow.features.sport,
            tot_pkts=flow.features.tot_pkts,
            tot_bytes=flow.features.tot_bytes,
            src=str(record.src) if record else "",
            dst=str(record.dst) if record else "",
        )
        self.alerts.append(alert)
        return alert

    def observe_batch(self, flows) -> list[Alert]:
        """Vectorized scoring of many closed flows at once."""
        flows = list(flows)
        if not flows:
            return []
        X = np.array([f.features.as_tuple() for f in flows], dtype=np.float64)
        predictions = self.model.predict_many(X)
        new_alerts = []
        for flow, predicted in zip(flows, predictions):
            predicted_attack = bool(predicted)
            actual_attack = flow.label == LABEL_ATTACK
            self.confusion = self.confusion.add(actual_attack, predicted_attack)
            if predicted_attack:
                record = flow.record
                alert = Alert(
                    ts=record.last_ts if record else 0.0,
                    model=self.model.algorithm,
                    sport=flow.features.sport,
                    tot_pkts=flow.features.tot_pkts,
                    tot_bytes=flow.features.tot_bytes,
                    src=str(record.src) if record else "",
                    dst=str(record.dst) if record else "",
                )
                self.alerts.append(alert)
                new_alerts.append(alert)
        return new_alerts

    def metrics(self) -> Metrics:
        return metrics_from_confusion(self.confusion)
