"""The five detection models, implemented from scratch on numpy.

Decision tree (CART, Gini), random forest (bagged CART with per-split
feature subsampling), logistic regression (full-batch gradient descent
on cross-entropy), Gaussian naive Bayes, and k-nearest-neighbors on
standardized features.  Prediction ties always resolve toward the
attack class: a missed attack costs more than a false alarm.

Class encoding everywhere: 0 = normal, 1 = attack.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dataset import Dataset
from ..flows import LABEL_ATTACK
from .metrics import ConfusionMatrix, Metrics, metrics_from_confusion

ALGORITHMS = (
    "decision_tree",
    "random_forest",
    "logistic_regression",
    "naive_bayes",
    "knn",
)

MODEL_FILE_VERSION = "1"

DEFAULT_HYPERPARAMS = {
    "decision_tree": {"min_samples_split": 2},
    "random_forest": {"n_trees": 100, "min_samples_split": 2},
    "logistic_regression": {"learning_rate": 0.1, "epochs": 500},
    "naive_bayes": {"var_floor_scale": 1e-9},
    "knn": {"k": 5},
}


class SingleClassTrainingError(ValueError):
    pass


class NonFiniteFeatureError(ValueError):
    pass


def dataset_arrays(dataset: Dataset):
    """(X, y) feature matrix and 0/1 labels for a labeled-flow dataset."""
    X = np.array([row.features.as_tuple() for row in dataset.rows], dtype=np.float64)
    y = np.array([1 if row.label == LABEL_ATTACK else 0 for row in dataset.rows], dtype=np.int64)
    return X, y


# ------------------------------------------------------------------ scaling


@dataclass
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Scaler":
        std = X.std(axis=0)
        std[std == 0.0] = 1.0  # constant feature: leave it centered only
        return cls(X.mean(axis=0), std)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std


# ------------------------------------------------------------- decision tree


@dataclass
class _TreeNode:
    prediction: int | None = None
    feature: int | None = None
    threshold: float | None = None
    left: "_TreeNode | None" = None
    right: "_TreeNode | None" = None


def _leaf(y: np.ndarray) -> _TreeNode:
    attacks = int(y.sum())
    return _TreeNode(prediction=1 if 2 * attacks >= len(y) else 0)


def _best_split(X: np.ndarray, y: np.ndarray, features) -> tuple[int, float] | None:
    """Lowest weighted Gini split; ties go to the lowest feature index,
    then the lowest threshold.  Returns None when no split separates."""
    n = len(y)
    best = None  # (impurity, feature, threshold)
    for f in features:
        xs = X[:, f]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        ys_sorted = y[order]
        cut = np.nonzero(xs_sorted[1:] > xs_sorted[:-1])[0] + 1  # left sizes
        if len(cut) == 0:
            continue
        cum_attacks = np.cumsum(ys_sorted)
        total_attacks = cum_attacks[-1]
        left_n = cut.astype(np.float64)
        left_a = cum_attacks[cut - 1].astype(np.float64)
        right_n = n - left_n
        right_a = total_attacks - left_a
        gini_left = 1.0 - (left_a / left_n) ** 2 - ((left_n - left_a) / left_n) ** 2
        gini_right = 1.0 - (right_a / right_n) ** 2 - ((right_n - right_a) / right_n) ** 2
        weighted = (left_n * gini_left + right_n * gini_right) / n
        i = int(np.argmin(weighted))  # first minimum = lowest threshold
        candidate = (float(weighted[i]), f)
        if best is None or candidate[0] < best[0]:
            k = cut[i]
            threshold = (xs_sorted[k - 1] + xs_sorted[k]) / 2.0
            best = (candidate[0], f, float(threshold))
    if best is None:
        return None
    return best[1], best[2]


def _grow_tree(X, y, min_samples_split, feature_picker=None) -> _TreeNode:
    # iterative depth-first growth; unlimited depth must not hit the
    # interpreter recursion limit
    root = _TreeNode()
    stack = [(root, X, y)]
    while stack:
        node, Xn, yn = stack.pop()
        if len(yn) < min_samples_split or yn.min() == yn.max():
            node.prediction = _leaf(yn).prediction
            continue
        features = range(Xn.shape[1]) if feature_picker is None else feature_picker(Xn.shape[1])
        split = _best_split(Xn, yn, features)
        if split is None:
            node.prediction = _leaf(yn).prediction
            continue
        f, threshold = split
        mask = Xn[:, f] <= threshold
        node.feature = f
        node.threshold = threshold
        node.left = _TreeNode()
        node.right = _TreeNode()
        stack.append((node.left, Xn[mask], yn[mask]))
        stack.append((node.right, Xn[~mask], yn[~mask]))
    return root


def _tree_predict(node: _TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.empty(len(X), dtype=np.int64)
    stack = [(node, np.arange(len(X)))]
    while stack:
        current, idx = stack.pop()
        if len(idx) == 0:
            continue
        if current.prediction is not None:
            out[idx] = current.prediction
            continue
        mask = X[idx, current.feature] <= current.threshold
        stack.append((current.left, idx[mask]))
        stack.append((current.right, idx[~mask]))
    return out


def _tree_to_dict(node: _TreeNode):
    if node.prediction is not None:
        return {"leaf": int(node.prediction)}
    return {
        "feature": int(node.feature),
        "threshold": float(node.threshold),
        "left": _tree_to_dict(node.left),
        "right": _tree_to_dict(node.right),
    }


def _tree_from_dict(data) -> _TreeNode:
    if "leaf" in data:
        return _TreeNode(prediction=data["leaf"])
    return _TreeNode(
        feature=data["feature"],
        threshold=data["threshold"],
        left=_tree_from_dict(data["left"]),
        right=_tree_from_dict(data["right"]),
    )


class DecisionTree:
    def __init__(self, min_samples_split: int = 2):
        self.min_samples_split = min_samples_split
        self.root: _TreeNode | None = None

    def fit(self, X, y, seed=0):
        self.root = _grow_tree(X, y, self.min_samples_split)

    def predict_many(self, X):
        return _tree_predict(self.root, X)

    def to_dict(self):
        return {"min_samples_split": self.min_samples_split, "root": _tree_to_dict(self.root)}

    @classmethod
    def from_dict(cls, data):
        model = cls(data["min_samples_split"])
        model.root = _tree_from_dict(data["root"])
        return model


class RandomForest:
    """Bagging over CART trees with sqrt(d) features considered per split."""

    def __init__(self, n_trees: int = 100, min_samples_split: int = 2):
        self.n_trees = n_trees
        self.min_samples_split = min_samples_split
        self.trees: list[_TreeNode] = []

    def fit(self, X, y, seed=0):
        n, d = X.shape
        n_features = math.ceil(math.sqrt(d))
        self.trees = []
        for t in range(self.n_trees):
            rng = np.random.default_rng([seed, t])
            sample = rng.integers(0, n, n)

            def picker(total, rng=rng):
                return np.sort(rng.choice(total, size=n_features, replace=False))

            self.trees.append(
                _grow_tree(X[sample], y[sample], self.min_samples_split, picker)
            )

    def tree_votes(self, X):
        return np.stack([_tree_predict(tree, X) for tree in self.trees])

    def predict_many(self, X):
        votes = self.tree_votes(X).sum(axis=0)
        return (2 * votes >= self.n_trees).astype(np.int64)

    def to_dict(self):
        return {
            "n_trees": self.n_trees,
            "min_samples_split": self.min_samples_split,
            "trees": [_tree_to_dict(t) for t in self.trees],
        }

    @classmethod
    def from_dict(cls, data):
        model = cls(data["n_trees"], data["min_samples_split"])
        model.trees = [_tree_from_dict(t) for t in data["trees"]]
        return model


# ------------------------------------------------------ logistic regression


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))  # numerically stable


def logistic_gradient(weights, X, y):
    """Mean cross-entropy gradient at ``weights`` (bias is weights[0])."""
    Xb = np.hstack([np.ones((len(X), 1)), X])
    p = _sigmoid(Xb @ weights)
    return Xb.T @ (p - y) / len(y)


def logistic_loss(weights, X, y):
    Xb = np.hstack([np.ones((len(X), 1)), X])
    z = Xb @ weights
    # log(1 + e^z) - y z, computed stably
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


class LogisticRegression:
    def __init__(self, learning_rate: float = 0.1, epochs: int = 500):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.weights: np.ndarray | None = None
        self.losses: list[float] = []

    def fit(self, X, y, seed=0):
        self.weights = np.zeros(X.shape[1] + 1)
        self.losses = []
        for _ in range(self.epochs):
            self.losses.append(logistic_loss(self.weights, X, y))
            self.weights -= self.learning_rate * logistic_gradient(self.weights, X, y)

    def predict_many(self, X):
        Xb = np.hstack([np.ones((len(X), 1)), X])
        return (Xb @ self.weights >= 0.0).astype(np.int64)  # p >= 0.5 -> attack

    def to_dict(self):
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        model = cls(data["learning_rate"], data["epochs"])
        model.weights = np.array(data["weights"])
        return model


# ------------------------------------------------------------- naive Bayes


class NaiveBayes:
    """Gaussian per feature per class, log-space scoring, floored variance."""

    def __init__(self, var_floor_scale: float = 1e-9):
        self.var_floor_scale = var_floor_scale
        self.log_priors: np.ndarray | None = None
        self.means: np.ndarray | None = None  # (2, d)
        self.variances: np.ndarray | None = None  # (2, d)

    def fit(self, X, y, seed=0):
        floor = self.var_floor_scale * max(float(X.var(axis=0).max()), 1.0)
        self.log_priors = np.log(np.array([np.mean(y == 0), np.mean(y == 1)]))
        self.means = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])
        self.variances = np.maximum(
            np.stack([X[y == c].var(axis=0) for c in (0, 1)]), floor
        )

    def log_posteriors(self, X):
        """Unnormalized per-class log posteriors, shape (n, 2)."""
        out = np.empty((len(X), 2))
        for c in (0, 1):
            out[:, c] = self.log_priors[c] + np.sum(
                -0.5 * np.log(2.0 * np.pi * self.variances[c])
                - (X - self.means[c]) ** 2 / (2.0 * self.variances[c]),
                axis=1,
            )
        return out

    def predict_many(self, X):
        scores = self.log_posteriors(X)
        return (scores[:, 1] >= scores[:, 0]).astype(np.int64)

    def to_dict(self):
        return {
            "var_floor_scale": self.var_floor_scale,
            "log_priors": self.log_priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        model = cls(data["var_floor_scale"])
        model.log_priors = np.array(data["log_priors"])
        model.means = np.array(data["means"])
        model.variances = np.array(data["variances"])
        return model


# -------------------------------------------------------------------- kNN


class KNearestNeighbors:
    """Euclidean distance on standardized features, majority of k.

    Neighbor ties at equal distance break toward the lower training-row
    index (stable order); class ties break toward attack.
    """

    def __init__(self, k: int = 5):
        self.k = k
        self.X: np.ndarray | None = None
        self.y: np.ndarray | None = None

    def fit(self, X, y, seed=0):
        self.X = X.copy()
        self.y = y.copy()

    def predict_many(self, X, chunk: int = 256):
        out = np.empty(len(X), dtype=np.int64)
        train_sq = np.einsum("ij,ij->i", self.X, self.X)
        for start in range(0, len(X), chunk):
            Q = X[start : start + chunk]
            d2 = train_sq + np.einsum("ij,ij->i", Q, Q)[:, None] - 2.0 * (Q @ self.X.T)
            for row in range(len(Q)):
                d = d2[row]
                if self.k < len(d):
                    # keep every point tied with the k-th distance so the
                    # index tie-break below is applied across the boundary
                    kth = np.partition(d, self.k - 1)[self.k - 1]
                    idx = np.nonzero(d <= kth)[0]
                else:
                    idx = np.arange(len(d))
                # deterministic order among the nearest: distance, then index
                idx = idx[np.lexsort((idx, d[idx]))][: self.k]
                votes = int(self.y[idx].sum())
                out[start + row] = 1 if 2 * votes >= min(self.k, len(idx)) else 0
        return out

    def to_dict(self):
        return {"k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, data):
        model = cls(data["k"])
        model.X = np.array(data["X"], dtype=np.float64)
        model.y = np.array(data["y"], dtype=np.int64)
        return model


_MODEL_CLASSES = {
    "decision_tree": DecisionTree,
    "random_forest": RandomForest,
    "logistic_regression": LogisticRegression,
    "naive_bayes": NaiveBayes,
    "knn": KNearestNeighbors,
}

_SCALED = ("logistic_regression", "knn")


@dataclass
class TrainedModel:
    algorithm: str
    model: object
    scaler: Scaler | None
    training_meta: dict = field(default_factory=dict)

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        if self.scaler is not None:
            X = self.scaler.transform(X)
        return self.model.predict_many(X)

    def predict(self, features) -> str:
        x = np.asarray(features, dtype=np.float64).reshape(1, -1)
        return "attack" if self.predict_many(x)[0] else "normal"


def train(algorithm: str, train_set: Dataset, hyperparams: dict | None = None, seed: int = 0) -> TrainedModel:
    if algorithm not in _MODEL_CLASSES:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    X, y = dataset_arrays(train_set)
    if len(y) == 0:
        raise SingleClassTrainingError("training set is empty")
    if not np.isfinite(X).all():
        raise NonFiniteFeatureError("training features contain non-finite values")
    if y.min() == y.max():
        raise SingleClassTrainingError("training set contains a single class")
    params = dict(DEFAULT_HYPERPARAMS[algorithm])
    params.update(hyperparams or {})
    model = _MODEL_CLASSES[algorithm](**params)
    scaler = None
    if algorithm in _SCALED:
        scaler = Scaler.fit(X)
        X = scaler.transform(X)
    model.fit(X, y, seed=seed)
    return TrainedModel(algorithm, model, scaler, {"hyperparams": params, "seed": seed})


def evaluate(model: TrainedModel, test_set: Dataset) -> tuple[ConfusionMatrix, Metrics]:
    if len(test_set.rows) == 0:
        raise ValueError("empty test set")
    X, y = dataset_arrays(test_set)
    if not np.isfinite(X).all():
        raise NonFiniteFeatureError("test features contain non-finite values")
    predicted = model.predict_many(X)
    tp = int(np.sum((y == 1) & (predicted == 1)))
    tn = int(np.sum((y == 0) & (predicted == 0)))
    fp = int(np.sum((y == 0) & (predicted == 1)))
    fn = int(np.sum((y == 1) & (predicted == 0)))
    cm = ConfusionMatrix(tp, tn, fp, fn)
    return cm, metrics_from_confusion(cm)


# -------------------------------------------------------------- persistence


def save_model(model: TrainedModel, path):
    payload = {
        "version": MODEL_FILE_VERSION,
        "algorithm": model.algorithm,
        "model": model.model.to_dict(),
        "scaler": None
        if model.scaler is None
        else {"mean": model.scaler.mean.tolist(), "std": model.scaler.std.tolist()},
        "training_meta": model.training_meta,
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_model(path) -> TrainedModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != MODEL_FILE_VERSION:
        raise ValueError(f"unsupported model file version {payload.get('version')!r}")
    algorithm = payload["algorithm"]
    model = _MODEL_CLASSES[algorithm].from_dict(payload["model"])
    scaler = None
    if payload["scaler"] is not None:
        scaler = Scaler(np.array(payload["scaler"]["mean"]), np.array(payload["scaler"]["std"]))
    return TrainedModel(algorithm, model, scaler, payload.get("training_meta", {}))
