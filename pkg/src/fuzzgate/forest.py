"""Random forest classifier built from scratch on numpy arrays.

Trees grow greedily on Gini gain with midpoint thresholds.  Each tree
trains on a bootstrap sample (size n, with replacement) and considers a
configurable number of candidate features per split.  Per-tree random
streams are spawned from the master seed, so training is deterministic
and tree order carries no information.

Feature importance is mean decrease in impurity, weighted by the node
sample fraction, normalized per tree and averaged across the forest.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

MODEL_FORMAT = "fuzzgate-forest"
MODEL_FORMAT_VERSION = 1

MAX_FEATURES_ALL = "all"
MAX_FEATURES_SQRT = "sqrt"


class SingleClassError(ValueError):
    """Training data contains only one class."""


class SchemaMismatchError(ValueError):
    """Input row does not match the schema the model was trained with."""


class ModelFormatError(ValueError):
    """Model file is corrupt or has an unsupported version."""


@dataclass(frozen=True)
class ForestHyperparams:
    n_estimators: int = 100
    max_depth: int | None = 10
    min_samples_split: int = 2
    min_samples_leaf: int = 10
    max_features: str | int = MAX_FEATURES_ALL
    bootstrap: bool = True  # disabled only as a test hook

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if isinstance(self.max_features, str):
            if self.max_features not in (MAX_FEATURES_ALL, MAX_FEATURES_SQRT):
                raise ValueError(f"unknown max_features {self.max_features!r}")
        elif self.max_features < 1:
            raise ValueError("max_features count must be >= 1")

    def to_json(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ForestHyperparams":
        return cls(**doc)


def gini(label_counts: Sequence[float]) -> float:
    """Gini impurity ``1 - sum(p_i^2)`` of a class-count vector."""
    counts = [float(c) for c in label_counts]
    if any(c < 0 for c in counts):
        raise ValueError("label counts must be non-negative")
    total = sum(counts)
    if total <= 0:
        raise ValueError("label counts sum to zero")
    return 1.0 - sum((c / total) ** 2 for c in counts)


# ---------------------------------------------------------------------------
# Single tree
# ---------------------------------------------------------------------------

@dataclass
class _Tree:
    """Flat array encoding; feature == -1 marks a leaf."""

    feature: np.ndarray  # int64
    threshold: np.ndarray  # float64
    left: np.ndarray  # int64
    right: np.ndarray  # int64
    value: np.ndarray  # float64, success fraction at the node
    n_samples: np.ndarray  # int64
    pos: np.ndarray  # int64, positives at the node

    def apply(self, X: np.ndarray) -> np.ndarray:
        idx = np.zeros(len(X), dtype=np.int64)
        while True:
            feat = self.feature[idx]
            active = np.flatnonzero(feat >= 0)
            if len(active) == 0:
                return self.value[idx]
            node = idx[active]
            go_left = X[active, feat[active]] <= self.threshold[node]
            idx[active] = np.where(go_left, self.left[node], self.right[node])


def _gini_of(pos: float, n: float) -> float:
    p = pos / n
    return 1.0 - (p * p + (1.0 - p) * (1.0 - p))


def _best_split(X, y, candidates, min_leaf):
    """Best (weighted child impurity, feature, threshold) over candidate features.

    Candidate order breaks ties: the first strictly-best split wins.
    """
    n = len(y)
    best = None
    for j in candidates:
        col = X[:, j]
        order = np.argsort(col, kind="stable")
        col_sorted = col[order]
        y_sorted = y[order]
        boundaries = np.flatnonzero(col_sorted[1:] != col_sorted[:-1]) + 1
        if len(boundaries) == 0:
            continue
        valid = (boundaries >= min_leaf) & (n - boundaries >= min_leaf)
        boundaries = boundaries[valid]
        if len(boundaries) == 0:
            continue
        pos_cum = np.cumsum(y_sorted)
        total_pos = pos_cum[-1]
        left_n = boundaries.astype(np.float64)
        left_pos = pos_cum[boundaries - 1].astype(np.float64)
        right_n = n - left_n
        right_pos = total_pos - left_pos
        pl = left_pos / left_n
        pr = right_pos / right_n
        gini_left = 1.0 - (pl * pl + (1.0 - pl) * (1.0 - pl))
        gini_right = 1.0 - (pr * pr + (1.0 - pr) * (1.0 - pr))
        weighted = (left_n * gini_left + right_n * gini_right) / n
        k = int(np.argmin(weighted))
        if best is None or weighted[k] < best[0] - 1e-12:
            cut = int(boundaries[k])
            threshold = (col_sorted[cut - 1] + col_sorted[cut]) / 2.0
            best = (float(weighted[k]), int(j), float(threshold))
    return best


def _grow_tree(X, y, hp: ForestHyperparams, rng: np.random.Generator,
               importance: np.ndarray) -> _Tree:
    n_features = X.shape[1]
    if hp.max_features == MAX_FEATURES_ALL:
        k_features = n_features
    elif hp.max_features == MAX_FEATURES_SQRT:
        k_features = max(1, int(math.sqrt(n_features)))
    else:
        k_features = min(int(hp.max_features), n_features)

    feature = [0]
    threshold = [0.0]
    left = [0]
    right = [0]
    value = [0.0]
    n_samples = [0]
    pos = [0]

    def new_node() -> int:
        feature.append(0)
        threshold.append(0.0)
        left.append(0)
        right.append(0)
        value.append(0.0)
        n_samples.append(0)
        pos.append(0)
        return len(feature) - 1

    max_depth = hp.max_depth if hp.max_depth is not None else np.inf
    n_root = len(y)
    stack = [(0, np.arange(n_root), 0)]  # (node_id, row indices, depth)
    while stack:
        node_id, rows, depth = stack.pop()
        y_node = y[rows]
        n = len(rows)
        n_pos = int(y_node.sum())
        n_samples[node_id] = n
        pos[node_id] = n_pos
        value[node_id] = n_pos / n

        pure = n_pos == 0 or n_pos == n
        if pure or depth >= max_depth or n < hp.min_samples_split:
            feature[node_id] = -1
            continue

        if k_features >= n_features:
            candidates = range(n_features)
        else:
            candidates = rng.choice(n_features, size=k_features, replace=False)
        found = _best_split(X[rows], y_node, candidates, hp.min_samples_leaf)
        parent_gini = _gini_of(n_pos, n)
        if found is None or found[0] >= parent_gini - 1e-12:
            feature[node_id] = -1
            continue

        weighted_child, j, cut = found
        go_left = X[rows, j] <= cut
        left_rows = rows[go_left]
        right_rows = rows[~go_left]
        importance[j] += (n * parent_gini - n * weighted_child) / n_root

        feature[node_id] = j
        threshold[node_id] = cut
        left_id = new_node()
        right_id = new_node()
        left[node_id] = left_id
        right[node_id] = right_id
        # right first so the left subtree is processed (and numbered) next
        stack.append((right_id, right_rows, depth + 1))
        stack.append((left_id, left_rows, depth + 1))

    return _Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        n_samples=np.array(n_samples, dtype=np.int64),
        pos=np.array(pos, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# Forest
# ---------------------------------------------------------------------------

@dataclass
class RandomForestModel:
    hyperparams: ForestHyperparams
    seed: int
    schema_fingerprint: str
    n_features: int
    trees: list[_Tree] = field(default_factory=list)
    _importances: np.ndarray | None = None

    def _check_width(self, X: np.ndarray) -> None:
        if X.shape[-1] != self.n_features:
            raise SchemaMismatchError(
                f"expected {self.n_features} features, got {X.shape[-1]}"
            )

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        self._check_width(X)
        total = np.zeros(len(X), dtype=np.float64)
        for tree in self.trees:
            total += tree.apply(X)
        return total / len(self.trees)

    def predict_proba(self, row: np.ndarray) -> float:
        return float(self.predict_proba_batch(np.asarray(row, dtype=np.float64)[None, :])[0])

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba_batch(X) >= 0.5).astype(np.int64)

    def predict(self, row: np.ndarray) -> int:
        return int(self.predict_proba(row) >= 0.5)

    def feature_importances(self) -> np.ndarray:
        if self._importances is None:
            raise ValueError("model carries no importances (loaded from file?)")
        return self._importances


def train_forest(train, hp: ForestHyperparams, seed: int,
                 schema_fingerprint: str = "") -> RandomForestModel:
    """Fit a forest on a :class:`~fuzzgate.features.FeatureMatrix`."""
    X = np.asarray(train.X, dtype=np.float64)
    y = np.asarray(train.y, dtype=np.int64)
    if len(y) == 0:
        raise ValueError("training set is empty")
    classes = np.unique(y)
    if len(classes) < 2:
        raise SingleClassError(f"training labels contain a single class: {classes.tolist()}")

    n = len(y)
    children = np.random.SeedSequence(seed).spawn(hp.n_estimators)
    trees: list[_Tree] = []
    importances = np.zeros(X.shape[1], dtype=np.float64)
    for child in children:
        rng = np.random.default_rng(child)
        if hp.bootstrap:
            rows = rng.integers(0, n, size=n)
            X_boot, y_boot = X[rows], y[rows]
            if len(np.unique(y_boot)) < 2:  # degenerate draw; fall back to the full set
                X_boot, y_boot = X, y
        else:
            X_boot, y_boot = X, y
        tree_importance = np.zeros(X.shape[1], dtype=np.float64)
        trees.append(_grow_tree(X_boot, y_boot, hp, rng, tree_importance))
        total = tree_importance.sum()
        if total > 0:
            importances += tree_importance / total

    grand_total = importances.sum()
    if grand_total > 0:
        importances = importances / grand_total
    model = RandomForestModel(
        hyperparams=hp,
        seed=seed,
        schema_fingerprint=schema_fingerprint,
        n_features=X.shape[1],
        trees=trees,
    )
    model._importances = importances
    return model


def feature_importances(model: RandomForestModel) -> np.ndarray:
    return model.feature_importances()


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def save_model(model: RandomForestModel, path: str | Path) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "hyperparams": model.hyperparams.to_json(),
        "seed": model.seed,
        "schema_fingerprint": model.schema_fingerprint,
        "n_features": model.n_features,
        "importances": (
            model._importances.tolist() if model._importances is not None else None
        ),
        "trees": [
            {
                "feature": tree.feature.tolist(),
                "threshold": tree.threshold.tolist(),
                "left": tree.left.tolist(),
                "right": tree.right.tolist(),
                "value": tree.value.tolist(),
                "n_samples": tree.n_samples.tolist(),
                "pos": tree.pos.tolist(),
            }
            for tree in model.trees
        ],
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path: str | Path) -> RandomForestModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"corrupt model file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a forest model file")
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('format_version')!r}")
    try:
        trees = [
            _Tree(
                feature=np.array(t["feature"], dtype=np.int64),
                threshold=np.array(t["threshold"], dtype=np.float64),
                left=np.array(t["left"], dtype=np.int64),
                right=np.array(t["right"], dtype=np.int64),
                value=np.array(t["value"], dtype=np.float64),
                n_samples=np.array(t["n_samples"], dtype=np.int64),
                pos=np.array(t["pos"], dtype=np.int64),
            )
            for t in doc["trees"]
        ]
        model = RandomForestModel(
            hyperparams=ForestHyperparams.from_json(doc["hyperparams"]),
            seed=doc["seed"],
            schema_fingerprint=doc["schema_fingerprint"],
            n_features=doc["n_features"],
            trees=trees,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt model file: {exc}") from exc
    if doc.get("importances") is not None:
        model._importances = np.array(doc["importances"], dtype=np.float64)
    return model
