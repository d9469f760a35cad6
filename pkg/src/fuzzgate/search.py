"""Random hyperparameter search for the forest.

Samples ``trials`` configurations from a discrete space, scores each by
validation accuracy on an inner 80/20 split of the training data, and
returns the best.  Ties prefer fewer trees, then shallower depth.
"""

from __future__ import annotations

import random

import numpy as np

from .features import FeatureMatrix, split
from .forest import ForestHyperparams, train_forest

DEFAULT_SEARCH_SPACE: dict[str, list] = {
    "n_estimators": [25, 50, 100, 150],
    "max_depth": [5, 10, 15, None],
    "min_samples_split": [2, 5, 10],
    "min_samples_leaf": [1, 5, 10, 20],
    "max_features": ["all", "sqrt"],
}


def _depth_key(depth: int | None) -> float:
    return float("inf") if depth is None else float(depth)


def hyperparameter_search(train: FeatureMatrix, space: dict[str, list],
                          trials: int, seed: int) -> ForestHyperparams:
    """Best hyperparameters found by random search over *space*."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for key in ("n_estimators", "max_depth", "min_samples_split",
                "min_samples_leaf", "max_features"):
        if key not in space or not space[key]:
            raise ValueError(f"search space is missing {key!r}")

    rng = random.Random(seed)
    inner_train, inner_val = split(train, ratio=0.8, seed=seed)

    best_hp: ForestHyperparams | None = None
    best_score = -1.0
    for trial in range(trials):
        hp = ForestHyperparams(
            n_estimators=rng.choice(space["n_estimators"]),
            max_depth=rng.choice(space["max_depth"]),
            min_samples_split=rng.choice(space["min_samples_split"]),
            min_samples_leaf=rng.choice(space["min_samples_leaf"]),
            max_features=rng.choice(space["max_features"]),
        )
        model = train_forest(inner_train, hp, seed=seed * 100003 + trial)
        accuracy = float(np.mean(model.predict_batch(inner_val.X) == inner_val.y))
        better = accuracy > best_score + 1e-12
        tie = abs(accuracy - best_score) <= 1e-12
        if tie and best_hp is not None:
            candidate_key = (hp.n_estimators, _depth_key(hp.max_depth))
            incumbent_key = (best_hp.n_estimators, _depth_key(best_hp.max_depth))
            better = candidate_key < incumbent_key
        if best_hp is None or better:
            best_hp, best_score = hp, accuracy
    return best_hp
