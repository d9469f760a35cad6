"""Baseline classifiers for the model-selection comparison.

Three deliberately simple, deterministic learners sharing the forest's
``predict_proba_batch`` interface: logistic regression trained by plain
gradient descent on log-loss with an L2 term, k-nearest-neighbours with
majority vote, and Gaussian naive Bayes with variance smoothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forest import SingleClassError

LOGISTIC = "logistic"
KNN = "knn"
GAUSSIAN_NB = "gaussianNB"

BASELINE_KINDS = (LOGISTIC, KNN, GAUSSIAN_NB)


def _check_two_classes(y: np.ndarray) -> None:
    if len(np.unique(y)) < 2:
        raise SingleClassError("training labels contain a single class")


@dataclass
class LogisticParams:
    learning_rate: float = 0.1
    iterations: int = 300
    l2: float = 1e-3


class LogisticModel:
    """Log-loss gradient descent on standardized features, zero init."""

    def __init__(self, params: LogisticParams):
        self.params = params
        self.mean: np.ndarray | None = None
        self.scale: np.ndarray | None = None
        self.weights: np.ndarray | None = None
        self.bias = 0.0

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogisticModel":
        _check_two_classes(y)
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self.mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale = scale
        Z = (X - self.mean) / self.scale

        n, d = Z.shape
        w = np.zeros(d)
        b = 0.0
        lr, lam = self.params.learning_rate, self.params.l2
        for _ in range(self.params.iterations):
            p = _sigmoid(Z @ w + b)
            err = p - y
            w -= lr * (Z.T @ err / n + lam * w)
            b -= lr * float(err.mean())
        self.weights, self.bias = w, b
        return self

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        Z = (np.asarray(X, dtype=np.float64) - self.mean) / self.scale
        return _sigmoid(Z @ self.weights + self.bias)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -35.0, 35.0)))


@dataclass
class KnnParams:
    k: int = 5


class KnnModel:
    """Majority vote of the k Euclidean-nearest training rows (no scaling)."""

    def __init__(self, params: KnnParams):
        if params.k < 1:
            raise ValueError("k must be >= 1")
        self.params = params
        self.X: np.ndarray | None = None
        self.y: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KnnModel":
        _check_two_classes(y)
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)
        return self

    def predict_proba_batch(self, X: np.ndarray, chunk: int = 256) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        k = min(self.params.k, len(self.y))
        out = np.empty(len(X), dtype=np.float64)
        train_sq = np.sum(self.X ** 2, axis=1)
        for start in range(0, len(X), chunk):
            block = X[start : start + chunk]
            d2 = train_sq[None, :] - 2.0 * block @ self.X.T + np.sum(block ** 2, axis=1)[:, None]
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
            out[start : start + len(block)] = self.y[nearest].mean(axis=1)
        return out


@dataclass
class GaussianNBParams:
    var_smoothing: float = 1e-9


class GaussianNBModel:
    """Per-class Gaussian likelihoods with smoothed variances."""

    def __init__(self, params: GaussianNBParams):
        self.params = params
        self.classes: np.ndarray | None = None
        self.log_prior: np.ndarray | None = None
        self.mean: np.ndarray | None = None
        self.var: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GaussianNBModel":
        _check_two_classes(y)
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        self.classes = np.unique(y)
        means, variances, priors = [], [], []
        epsilon = self.params.var_smoothing * float(X.var(axis=0).max() or 1.0)
        for cls in self.classes:
            rows = X[y == cls]
            means.append(rows.mean(axis=0))
            variances.append(rows.var(axis=0) + epsilon)
            priors.append(len(rows) / len(y))
        self.mean = np.array(means)
        self.var = np.array(variances)
        self.log_prior = np.log(np.array(priors))
        return self

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        joint = np.empty((len(X), len(self.classes)), dtype=np.float64)
        for idx in range(len(self.classes)):
            diff = X - self.mean[idx]
            log_likelihood = -0.5 * np.sum(
                np.log(2.0 * np.pi * self.var[idx]) + diff ** 2 / self.var[idx], axis=1
            )
            joint[:, idx] = self.log_prior[idx] + log_likelihood
        joint -= joint.max(axis=1, keepdims=True)
        probs = np.exp(joint)
        probs /= probs.sum(axis=1, keepdims=True)
        positive_col = int(np.flatnonzero(self.classes == 1)[0])
        return probs[:, positive_col]


def train_baseline(kind: str, train, hyper=None, seed: int = 0):
    """Train one of the named baselines on a FeatureMatrix.

    All three are deterministic; ``seed`` is accepted for interface
    symmetry with the forest.
    """
    del seed
    if kind == LOGISTIC:
        model = LogisticModel(hyper or LogisticParams())
    elif kind == KNN:
        model = KnnModel(hyper or KnnParams())
    elif kind == GAUSSIAN_NB:
        model = GaussianNBModel(hyper or GaussianNBParams())
    else:
        raise ValueError(f"unknown baseline kind {kind!r}")
    return model.fit(train.X, train.y)
