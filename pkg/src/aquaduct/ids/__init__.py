from .metrics import ConfusionMatrix, Metrics, confusion_from_predictions, metrics_from_confusion
from .models import (
    ALGORITHMS,
    TrainedModel,
    evaluate,
    load_model,
    save_model,
    train,
)
from .online import Alert, OnlineDetector

__all__ = [
    "ALGORITHMS",
    "Alert",
    "ConfusionMatrix",
    "Metrics",
    "OnlineDetector",
    "TrainedModel",
    "confusion_from_predictions",
    "evaluate",
    "load_model",
    "metrics_from_confusion",
    "save_model",
    "train",
]
