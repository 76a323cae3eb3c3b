"""Tests for training features, the linear SVM and pattern selection"""

import numpy as np
import pytest

from dasc import create_dataset
from dasc.descriptor.dasc import DascParams
from dasc.descriptor.patterns import SamplingPatternSet, enumerate_candidate_patterns, generate_log_polar_grid
from dasc.errors import DegenerateDataError, DimensionError, FormatError, ParameterError
from dasc.imaging.io import write_image
from dasc.learning.features import TrainingPair, build_pair_features, center_responses, extract_features, read_manifest
from dasc.learning.svm import (
    SvmConfig,
    SvmModel,
    read_model,
    select_top_patterns,
    svm_objective,
    train_linear_svm,
    write_model,
)

SMALL_PARAMS = DascParams(patch_size=3, support_size=11)


def small_candidates():
    return enumerate_candidate_patterns(generate_log_polar_grid(2, 8, 4))


def test_svm_config_validation():
    with pytest.raises(AssertionError):
        SvmConfig(c_svm=-1.0).validate()
    with pytest.raises(AssertionError):
        SvmConfig(epochs=0).validate()


def test_training_pair_validation():
    with pytest.raises(DimensionError):
        TrainingPair(np.zeros((5, 5)), np.zeros((5, 7)), 1)
    with pytest.raises(DimensionError):
        TrainingPair(np.zeros((5, 7)), np.zeros((5, 7)), 1)
    with pytest.raises(ParameterError):
        TrainingPair(np.zeros((5, 5)), np.zeros((5, 5)), 2)


def test_center_responses_match_self():
    window = np.random.default_rng(0).random((11, 11))
    candidates = small_candidates()
    responses = center_responses(window, candidates, SMALL_PARAMS)
    assert responses.shape == (len(candidates),)
    assert responses.min() >= SMALL_PARAMS.tau_c - 1e-12 and responses.max() <= 1.0 + 1e-12

    features = build_pair_features(TrainingPair(window, window, 1), candidates, SMALL_PARAMS)
    np.testing.assert_allclose(features, 1.0)


def test_matching_pairs_have_higher_features():
    ds = create_dataset("training_windows", window=11, seed=3, size=40)
    pairs = [item["pair"] for item in ds]
    x, y = extract_features(pairs, small_candidates(), SMALL_PARAMS, sigma_r=0.5, workers=2)
    assert x.shape == (40, len(small_candidates()))
    assert set(y.tolist()) == {0, 1}
    assert x[y == 1].mean() > x[y == 0].mean()


def test_svm_rejects_degenerate_sets():
    x = np.random.default_rng(1).random((6, 3))
    with pytest.raises(DegenerateDataError):
        train_linear_svm(x, np.ones(6, dtype=int))
    with pytest.raises(DegenerateDataError):
        train_linear_svm(x[:1], np.array([1]))
    with pytest.raises(DimensionError):
        train_linear_svm(x, np.array([0, 1]))
    with pytest.raises(ParameterError):
        train_linear_svm(x, np.array([0, 1, 2, 0, 1, 0]))


def test_svm_zero_cost_returns_zero_model():
    x = np.random.default_rng(2).random((6, 3))
    model = train_linear_svm(x, np.array([0, 1, 0, 1, 0, 1]), c_svm=0.0)
    np.testing.assert_array_equal(model.weights, 0.0)
    assert model.bias == 0.0


def test_svm_objective_history_non_increasing():
    item = create_dataset("planted_features", seed=5, size=1)[0]
    model = train_linear_svm(item["features"], item["label"], c_svm=1.0, epochs=20, seed=1)
    history = np.array(model.objective_history)
    assert len(history) == 20
    assert np.all(np.diff(history) <= 0)
    signs = np.where(item["label"] == 1, 1.0, -1.0)
    zero = svm_objective(np.zeros(12), 0.0, item["features"], signs, 1.0)
    assert history[-1] < zero


def test_svm_separates_planted_data():
    item = create_dataset("planted_features", seed=6, size=1)[0]
    model = train_linear_svm(item["features"], item["label"])
    accuracy = np.mean(model.predict(item["features"]) == item["label"])
    assert accuracy >= 0.95


def test_planted_dimensions_rank_first():
    hits = 0
    for seed in range(10):
        item = create_dataset("planted_features", seed=seed, size=1)[0]
        model = train_linear_svm(item["features"], item["label"], seed=seed)
        top4 = set(np.argsort(-np.abs(model.weights), kind="stable")[:4].tolist())
        hits += {3, 7} <= top4
    assert hits >= 9


def test_svm_is_deterministic_per_seed():
    item = create_dataset("planted_features", seed=8, size=1)[0]
    a = train_linear_svm(item["features"], item["label"], seed=4)
    b = train_linear_svm(item["features"], item["label"], seed=4)
    np.testing.assert_array_equal(a.weights, b.weights)
    assert a.bias == b.bias


def test_select_top_patterns():
    candidates = SamplingPatternSet(
        np.zeros((4, 2)), np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=np.float64)
    )
    model = SvmModel(np.array([0.5, -2.0, 2.0, 0.1]), 0.0)
    selected = select_top_patterns(model, candidates, 3)
    np.testing.assert_array_equal(selected.targets, [[0, 1], [-1, 0], [1, 0]])
    np.testing.assert_array_equal(selected.weights, [2.0, 2.0, 0.5])

    with pytest.raises(ParameterError):
        select_top_patterns(model, candidates, 5)
    with pytest.raises(ParameterError):
        select_top_patterns(model, candidates, 0)
    with pytest.raises(DimensionError):
        select_top_patterns(SvmModel(np.ones(3)), candidates, 2)


def test_model_file(tmp_path):
    model = SvmModel(np.array([0.25, -1.5, 3.0]), -0.75)
    write_model(tmp_path / "svm.model", model)
    loaded = read_model(tmp_path / "svm.model")
    np.testing.assert_array_equal(loaded.weights, model.weights)
    assert loaded.bias == model.bias

    (tmp_path / "bad.model").write_text("1.0\n")
    with pytest.raises(FormatError):
        read_model(tmp_path / "bad.model")


def test_read_manifest(tmp_path):
    rng = np.random.default_rng(9)
    (tmp_path / "windows").mkdir()
    for name in ("a", "b"):
        write_image(tmp_path / "windows" / f"{name}.pgm", rng.random((11, 11)))
    manifest = "path_a,path_b,label\nwindows/a.pgm,windows/b.pgm,1\nwindows/b.pgm,windows/a.pgm,0\n"
    (tmp_path / "train.csv").write_text(manifest)
    pairs = read_manifest(tmp_path / "train.csv")
    assert [p.label for p in pairs] == [1, 0]
    assert pairs[0].window_a.shape == (11, 11)

    (tmp_path / "bad.csv").write_text("windows/a.pgm,windows/b.pgm,2\n")
    with pytest.raises(FormatError):
        read_manifest(tmp_path / "bad.csv")
