import json

import numpy as np
import pytest

from fuzzgate.features import FeatureMatrix
from fuzzgate.forest import (
    ForestHyperparams,
    ModelFormatError,
    RandomForestModel,
    SchemaMismatchError,
    SingleClassError,
    _Tree,
    gini,
    load_model,
    save_model,
    train_forest,
)


def matrix(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    return FeatureMatrix(X, y, [str(i) for i in range(len(y))])


def toy_dataset(n=300, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, n)
    b = rng.normal(size=n)
    X = np.column_stack([a, b])
    return matrix(X, a)


class TestGini:
    def test_maximal_binary_impurity(self):
        assert gini((2, 2)) == 0.5

    def test_pure_node(self):
        assert gini((4, 0)) == 0.0

    def test_three_one(self):
        assert gini((3, 1)) == pytest.approx(0.375)

    def test_zero_total_is_an_error(self):
        with pytest.raises(ValueError):
            gini((0, 0))

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            gini((-1, 2))


class TestHyperparams:
    def test_defaults_are_the_tuned_optimum(self):
        hp = ForestHyperparams()
        assert hp.n_estimators == 100
        assert hp.max_depth == 10
        assert hp.min_samples_split == 2
        assert hp.min_samples_leaf == 10
        assert hp.max_features == "all"

    @pytest.mark.parametrize("kwargs", [
        {"n_estimators": 0},
        {"min_samples_split": 1},
        {"min_samples_leaf": 0},
        {"max_features": "bogus"},
        {"max_features": 0},
        {"max_depth": 0},
    ])
    def test_invalid_values_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ForestHyperparams(**kwargs)


class TestTraining:
    def test_memorization_with_unbounded_single_tree(self):
        """One tree, unlimited depth, leaf size 1, no bootstrap: training
        accuracy is 100% when no duplicate rows conflict."""
        rng = np.random.default_rng(7)
        X = rng.normal(size=(64, 3))
        y = rng.integers(0, 2, 64)
        train = matrix(X, y)
        hp = ForestHyperparams(
            n_estimators=1, max_depth=None, min_samples_split=2,
            min_samples_leaf=1, bootstrap=False,
        )
        model = train_forest(train, hp, seed=0)
        assert np.array_equal(model.predict_batch(X), y)

    def test_single_class_error(self):
        train = matrix(np.ones((20, 2)), np.ones(20, dtype=int))
        with pytest.raises(SingleClassError):
            train_forest(train, ForestHyperparams(n_estimators=2), seed=0)

    def test_empty_training_set_error(self):
        train = matrix(np.empty((0, 2)), np.empty(0, dtype=int))
        with pytest.raises(ValueError):
            train_forest(train, ForestHyperparams(), seed=0)

    def test_same_seed_identical_serialized_model(self, tmp_path):
        train = toy_dataset()
        hp = ForestHyperparams(n_estimators=5, min_samples_leaf=2)
        for run in range(2):
            save_model(train_forest(train, hp, seed=3), tmp_path / f"m{run}.json")
        assert (tmp_path / "m0.json").read_bytes() == (tmp_path / "m1.json").read_bytes()

    def test_different_seeds_differ(self, tmp_path):
        train = toy_dataset()
        hp = ForestHyperparams(n_estimators=5, min_samples_leaf=2)
        save_model(train_forest(train, hp, seed=3), tmp_path / "a.json")
        save_model(train_forest(train, hp, seed=4), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() != (tmp_path / "b.json").read_bytes()

    def test_learns_a_separable_signal(self):
        train = toy_dataset(seed=1)
        model = train_forest(train, ForestHyperparams(n_estimators=10), seed=0)
        fresh = toy_dataset(seed=2)
        assert np.mean(model.predict_batch(fresh.X) == fresh.y) == 1.0

    def test_sqrt_features_mode_trains(self):
        train = toy_dataset()
        hp = ForestHyperparams(n_estimators=5, max_features="sqrt", min_samples_leaf=2)
        model = train_forest(train, hp, seed=0)
        assert len(model.trees) == 5


def pure_leaf_tree(fraction: float) -> _Tree:
    return _Tree(
        feature=np.array([-1]), threshold=np.array([0.0]),
        left=np.array([0]), right=np.array([0]),
        value=np.array([fraction]), n_samples=np.array([10]),
        pos=np.array([int(10 * fraction)]),
    )


class TestPrediction:
    def test_all_success_leaves_give_probability_one(self):
        model = RandomForestModel(
            ForestHyperparams(n_estimators=3), 0, "", 2,
            trees=[pure_leaf_tree(1.0)] * 3,
        )
        assert model.predict_proba(np.zeros(2)) == 1.0

    def test_all_failure_leaves_give_probability_zero(self):
        model = RandomForestModel(
            ForestHyperparams(n_estimators=3), 0, "", 2,
            trees=[pure_leaf_tree(0.0)] * 3,
        )
        assert model.predict_proba(np.zeros(2)) == 0.0

    def test_vote_fraction_87_of_100(self):
        trees = [pure_leaf_tree(1.0)] * 87 + [pure_leaf_tree(0.0)] * 13
        model = RandomForestModel(ForestHyperparams(), 0, "", 2, trees=trees)
        assert model.predict_proba(np.zeros(2)) == pytest.approx(0.87)

    def test_probability_invariant_under_tree_permutation(self):
        train = toy_dataset()
        model = train_forest(train, ForestHyperparams(n_estimators=7, min_samples_leaf=2), seed=0)
        X = toy_dataset(seed=5).X
        before = model.predict_proba_batch(X)
        rng = np.random.default_rng(0)
        rng.shuffle(model.trees)
        after = model.predict_proba_batch(X)
        assert np.allclose(before, after)

    def test_schema_mismatch_error(self):
        model = train_forest(toy_dataset(), ForestHyperparams(n_estimators=2), seed=0)
        with pytest.raises(SchemaMismatchError):
            model.predict_proba(np.zeros(7))

    def test_threshold_at_half(self):
        trees = [pure_leaf_tree(1.0), pure_leaf_tree(0.0)]
        model = RandomForestModel(ForestHyperparams(), 0, "", 1, trees=trees)
        assert model.predict(np.zeros(1)) == 1  # 0.5 rounds up to success


def reference_importances(path) -> np.ndarray:
    """Brute-force impurity bookkeeping from the serialized node arrays."""
    doc = json.loads(path.read_text())
    per_tree = []
    for tree in doc["trees"]:
        feature = tree["feature"]
        left, right = tree["left"], tree["right"]
        n_samples, pos = tree["n_samples"], tree["pos"]
        totals = np.zeros(doc["n_features"])

        def impurity(node):
            p = pos[node] / n_samples[node]
            return 1.0 - p * p - (1.0 - p) * (1.0 - p)

        root_n = n_samples[0]
        for node in range(len(feature)):
            if feature[node] < 0:
                continue
            l, r = left[node], right[node]
            drop = (
                n_samples[node] * impurity(node)
                - n_samples[l] * impurity(l)
                - n_samples[r] * impurity(r)
            )
            totals[feature[node]] += drop / root_n
        if totals.sum() > 0:
            totals /= totals.sum()
        per_tree.append(totals)
    mean = np.mean(per_tree, axis=0)
    return mean / mean.sum() if mean.sum() > 0 else mean


class TestImportances:
    def test_sum_to_one(self):
        model = train_forest(toy_dataset(), ForestHyperparams(n_estimators=5), seed=0)
        assert abs(model.feature_importances().sum() - 1.0) < 1e-9

    def test_unused_feature_scores_zero(self):
        train = toy_dataset()
        model = train_forest(train, ForestHyperparams(n_estimators=10), seed=0)
        importances = model.feature_importances()
        # feature 0 decides the label; noise may appear in bootstrap splits,
        # but a feature never split on must be exactly zero if absent
        assert importances[0] > 0.9

    def test_single_feature_dataset_gets_full_weight(self):
        rng = np.random.default_rng(0)
        a = rng.integers(0, 2, 100)
        train = matrix(a[:, None], a)
        model = train_forest(train, ForestHyperparams(n_estimators=5, min_samples_leaf=1), seed=0)
        assert model.feature_importances().tolist() == [1.0]

    def test_informative_feature_beats_noise_and_matches_reference(self, tmp_path):
        rng = np.random.default_rng(3)
        a = rng.integers(0, 2, 400)
        b = rng.normal(size=400)
        train = matrix(np.column_stack([a, b]), a)
        model = train_forest(
            train, ForestHyperparams(n_estimators=10, min_samples_leaf=5), seed=0
        )
        importances = model.feature_importances()
        assert importances[0] > importances[1]

        path = tmp_path / "model.json"
        save_model(model, path)
        assert np.allclose(importances, reference_importances(path), atol=1e-9)


class TestSerialization:
    def test_round_trip_predicts_identically_on_1000_rows(self, tmp_path):
        train = toy_dataset()
        model = train_forest(train, ForestHyperparams(n_estimators=5, min_samples_leaf=2), seed=0)
        path = tmp_path / "model.json"
        save_model(model, path)
        clone = load_model(path)
        rng = np.random.default_rng(11)
        X = np.column_stack([rng.integers(0, 2, 1000), rng.normal(size=1000)]).astype(float)
        assert np.array_equal(model.predict_proba_batch(X), clone.predict_proba_batch(X))

    def test_truncated_file_is_corrupt(self, tmp_path):
        train = toy_dataset()
        model = train_forest(train, ForestHyperparams(n_estimators=2, min_samples_leaf=2), seed=0)
        path = tmp_path / "model.json"
        save_model(model, path)
        path.write_bytes(path.read_bytes()[: path.stat().st_size // 2])
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_version_mismatch_rejected(self, tmp_path):
        train = toy_dataset()
        model = train_forest(train, ForestHyperparams(n_estimators=2, min_samples_leaf=2), seed=0)
        path = tmp_path / "model.json"
        save_model(model, path)
        doc = json.loads(path.read_text())
        doc["format_version"] = 999
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_alien_json_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"something": "else"}')
        with pytest.raises(ModelFormatError):
            load_model(path)
