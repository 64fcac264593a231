import json

import numpy as np
import pytest

from thermact.classifier import (
    STD_FLOOR,
    ModelFormatError,
    SvmConfig,
    SvmModel,
    load_model,
    predict,
    predict_batch,
    save_model,
    train,
)
from thermact.core import ThermactError
from thermact.synth import toy_clusters


def hinge_objective(Z, y, w, b, lam):
    hinge = np.maximum(0.0, 1.0 - y * (Z @ w + b))
    return 0.5 * lam * (w @ w) + hinge.mean()


@pytest.fixture(scope="module")
def clusters():
    X, labels = toy_clusters(n_classes=7, per_class=20, dim=40, seed=11)
    return X, labels


class TestTrain:
    def test_separable_two_class_1d(self):
        X = np.array([[-1.0]] * 10 + [[1.0]] * 10)
        labels = ["neg"] * 10 + ["pos"] * 10
        model = train(X, labels)
        pred, scores = predict_batch(model, X)
        assert pred == labels
        # decision boundary flips sign between the two points
        neg_scores = model.decision_scores(np.array([-1.0]))
        pos_scores = model.decision_scores(np.array([1.0]))
        assert neg_scores[0] > neg_scores[1] and pos_scores[1] > pos_scores[0]

    def test_seven_class_clusters_full_training_accuracy(self, clusters):
        X, labels = clusters
        model = train(X, labels)
        pred, _ = predict_batch(model, X)
        assert pred == labels

    def test_deterministic_bit_identical(self, clusters):
        X, labels = clusters
        a = train(X, labels, SvmConfig(seed=5))
        b = train(X, labels, SvmConfig(seed=5))
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.biases, b.biases)
        assert np.array_equal(a.scaler_mean, b.scaler_mean)
        assert np.array_equal(a.scaler_std, b.scaler_std)

    def test_seed_changes_trajectory(self, clusters):
        X, labels = clusters
        a = train(X, labels, SvmConfig(seed=5))
        b = train(X, labels, SvmConfig(seed=6))
        assert not np.array_equal(a.weights, b.weights)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="2 distinct"):
            train(np.zeros((4, 2)), ["a"] * 4)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            train([], [])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            train([np.zeros(3), np.zeros(4)], ["a", "b"])

    def test_missing_class_rejected(self):
        X = np.array([[0.0], [1.0]])
        with pytest.raises(ValueError, match="no training examples"):
            train(X, ["a", "b"], classes=("a", "b", "c"))

    def test_constant_feature_passes_through_centered(self):
        X = np.array([[1.0, -1.0, 7.0], [1.0, 1.0, 7.0]] * 5)
        labels = ["a", "b"] * 5
        model = train(X, labels)
        assert model.scaler_std[0] == 1.0 and model.scaler_std[2] == 1.0
        assert model.scaler_std[1] > STD_FLOOR


class TestDuplication:
    """Uniform duplication leaves standardization and the averaged hinge
    unchanged, but lam = 1/(C*m) halves when m doubles, so objective
    equivalence (and hence model equivalence) needs C halved alongside."""

    def test_objective_equivalence_oracle(self, rng):
        X = rng.normal(0, 1, (30, 6))
        y = np.where(rng.uniform(size=30) < 0.5, 1.0, -1.0)
        Xd = np.concatenate([X, X])
        yd = np.concatenate([y, y])
        # standardization invariance (population std)
        assert np.allclose(X.mean(0), Xd.mean(0), atol=1e-12)
        assert np.allclose(X.std(0), Xd.std(0), atol=1e-12)
        w = rng.normal(0, 1, 6)
        b = 0.3
        m = len(y)
        c = 1.0
        lam_orig = 1.0 / (c * m)
        lam_dup_same_cfg = 1.0 / (c * 2 * m)
        lam_dup_matched = 1.0 / ((c / 2) * 2 * m)
        obj = hinge_objective(X, y, w, b, lam_orig)
        assert np.isclose(
            hinge_objective(Xd, yd, w, b, lam_dup_matched), obj, atol=1e-12
        )
        # with the config unchanged the regularizer halves: not equivalent
        assert not np.isclose(hinge_objective(Xd, yd, w, b, lam_dup_same_cfg), obj, atol=1e-6)

    def test_matched_lambda_models_agree(self, clusters):
        X, labels = clusters
        base = train(X, labels, SvmConfig(regularization_c=1.0))
        dup = train(
            np.concatenate([X, X]),
            list(labels) + list(labels),
            SvmConfig(regularization_c=0.5),
        )
        assert np.allclose(base.scaler_mean, dup.scaler_mean, atol=1e-12)
        assert np.allclose(base.scaler_std, dup.scaler_std, atol=1e-12)
        pred_base, _ = predict_batch(base, X)
        pred_dup, _ = predict_batch(dup, X)
        assert pred_base == pred_dup


class TestPredict:
    def test_training_example_gets_its_label(self, clusters):
        X, labels = clusters
        model = train(X, labels)
        label, scores = predict(model, X[3])
        assert label == labels[3]
        assert scores.shape == (7,)

    def test_tie_breaks_to_lowest_class_index(self):
        model = SvmModel(
            classes=("a", "b", "c"),
            weights=np.zeros((3, 2)),
            biases=np.zeros(3),
            scaler_mean=np.zeros(2),
            scaler_std=np.ones(2),
            train_config=SvmConfig(),
        )
        label, scores = predict(model, np.zeros(2))
        assert label == "a"
        assert np.all(scores == 0.0)

    def test_symmetric_training_near_tie_is_deterministic(self):
        X = np.array([[-1.0]] * 8 + [[1.0]] * 8)
        labels = ["a"] * 8 + ["b"] * 8
        model = train(X, labels)
        label1, scores1 = predict(model, np.zeros(1))
        label2, scores2 = predict(model, np.zeros(1))
        assert label1 == label2
        assert np.array_equal(scores1, scores2)
        # mirror symmetry of the two binary problems: scores negate each other
        assert np.isclose(scores1[0], -scores1[1], atol=1e-9)

    def test_batch_matches_single(self, clusters, rng):
        X, labels = clusters
        model = train(X, labels)
        queries = rng.normal(0, 3, (25, X.shape[1]))
        batch_labels, batch_scores = predict_batch(model, queries)
        for i, q in enumerate(queries):
            label, scores = predict(model, q)
            assert label == batch_labels[i]
            assert np.array_equal(scores, batch_scores[i])

    def test_dimension_mismatch(self, clusters):
        X, labels = clusters
        model = train(X, labels)
        with pytest.raises(ValueError, match="dimension"):
            predict(model, np.zeros(X.shape[1] + 1))


class TestInvariants:
    def test_argmax_invariant_under_uniform_scaling(self, clusters, rng):
        X, labels = clusters
        alpha = 37.5
        base = train(X, labels)
        scaled = train(alpha * X, labels)
        queries = rng.normal(0, 3, (20, X.shape[1]))
        pred_base, _ = predict_batch(base, queries)
        pred_scaled, _ = predict_batch(scaled, alpha * queries)
        assert pred_base == pred_scaled

    def test_scores_affine_in_input(self, clusters, rng):
        X, labels = clusters
        model = train(X, labels)
        x1 = rng.normal(0, 2, X.shape[1])
        x2 = rng.normal(0, 2, X.shape[1])
        for alpha in (0.0, 0.25, 0.6, 1.0):
            mix = model.decision_scores(alpha * x1 + (1 - alpha) * x2)
            combo = alpha * model.decision_scores(x1) + (1 - alpha) * model.decision_scores(x2)
            assert np.abs(mix - combo).max() < 1e-9

    def test_margin_reached_before_max_epochs(self):
        X, labels = toy_clusters(n_classes=3, per_class=15, dim=10, seed=3)
        model = train(X, labels, SvmConfig(max_epochs=200))
        pred, _ = predict_batch(model, X)
        assert pred == labels


class TestPersistence:
    def test_round_trip_preserves_predictions(self, clusters, tmp_path, rng):
        X, labels = clusters
        model = train(X, labels)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded, config = load_model(path)
        assert loaded.classes == model.classes
        assert config["svm"]["seed"] == model.train_config.seed
        queries = rng.normal(0, 3, (100, X.shape[1]))
        labels_a, scores_a = predict_batch(model, queries)
        labels_b, scores_b = predict_batch(loaded, queries)
        assert labels_a == labels_b
        assert np.abs(scores_a - scores_b).max() < 1e-12

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"version": 99}))
        with pytest.raises(ModelFormatError, match="version"):
            load_model(path)

    def test_not_a_model_file(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"something": 1}))
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_corrupt_json(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{ nope")
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_unwritable_path_surfaces_error(self, clusters, tmp_path):
        X, labels = clusters
        model = train(X, labels)
        bad = tmp_path / "no_such_dir" / "model.json"
        with pytest.raises(ThermactError, match="no_such_dir"):
            save_model(model, bad)

    def test_embedded_pipeline_config(self, clusters, tmp_path):
        X, labels = clusters
        model = train(X, labels)
        path = tmp_path / "model.json"
        pipeline = {"svm": {"seed": 42}, "preprocess": {"target_len": 20}}
        save_model(model, path, config=pipeline)
        _, config = load_model(path)
        assert config == pipeline
