"""
Tests for the weighted baseline classifiers
"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent.parent))

from src.baselines import (
    BASELINES, BernoulliNaiveBayes, DecisionTree, LogisticRegression, load_model, rescale_weights
)
from src.baselines.decision_tree import best_split, weighted_entropy
from src.utils.errors import PainFairError, ShapeMismatchError


def create_sample_data(n=200, seed=0):
    """Two informative features, one noise feature; label = x0 + x1 > 1."""
    rng = np.random.default_rng(seed)
    x = rng.random((n, 3))
    y = (x[:, 0] + x[:, 1] > 1.0).astype(int)
    return x, y


def test_xor_needs_zero_gain_root_split():
    x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    tree = DecisionTree(max_depth=2).fit(x, y)
    assert tree.predict(x).tolist() == y.tolist()
    assert tree.depth() == 2
    assert tree.root["gain"] == pytest.approx(0.0)


def test_gain_ties_pick_lowest_feature():
    x = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    y = np.array([0, 0, 1, 1])
    feature, threshold, gain = best_split(x, y, np.ones(4))
    assert feature == 0
    assert threshold == 1.5
    assert gain == pytest.approx(1.0)


def test_weighted_entropy():
    assert weighted_entropy(1.0, 2.0) == pytest.approx(1.0)
    assert weighted_entropy(0.0, 2.0) == 0.0
    assert weighted_entropy(0.0, 0.0) == 0.0


def test_tree_respects_depth_and_weights():
    x, y = create_sample_data()
    shallow = DecisionTree(max_depth=1).fit(x, y)
    assert shallow.depth() == 1

    # a heavy minority flips a pure-majority leaf
    x1 = np.array([[0.0], [0.0], [0.0]])
    y1 = np.array([0, 0, 1])
    assert DecisionTree().fit(x1, y1).predict(x1).tolist() == [0, 0, 0]
    assert DecisionTree().fit(x1, y1, weights=[1.0, 1.0, 5.0]).predict(x1).tolist() == [1, 1, 1]

    with pytest.raises(ValueError):
        DecisionTree(max_depth=0)


def test_logistic_learns_the_boundary():
    x, y = create_sample_data(n=400, seed=1)
    model = LogisticRegression().fit(x, y)
    assert model.coef[0] > 0 and model.coef[1] > 0
    assert abs(model.coef[2]) < min(model.coef[0], model.coef[1]) / 4
    assert np.mean(model.predict(x) == y) >= 0.9


def test_logistic_weight_scaling_invariance():
    x, y = create_sample_data(n=120, seed=2)
    weights = np.random.default_rng(3).uniform(0.5, 2.0, 120)
    first = LogisticRegression(max_iter=2000, tolerance=0.0).fit(x, y, weights)
    second = LogisticRegression(max_iter=2000, tolerance=0.0).fit(x, y, 10.0 * weights)
    assert np.allclose(first.coef, second.coef, atol=1e-8)
    assert first.intercept == pytest.approx(second.intercept, abs=1e-8)


def test_logistic_weight_equals_duplication():
    x, y = create_sample_data(n=60, seed=4)
    weights = np.ones(60)
    weights[0] = 2.0
    weighted = LogisticRegression(max_iter=3000, tolerance=0.0).fit(x, y, weights)
    duplicated = LogisticRegression(max_iter=3000, tolerance=0.0).fit(np.vstack([x, x[:1]]), np.r_[y, y[:1]])
    assert np.allclose(weighted.coef, duplicated.coef, atol=1e-6)


def test_naive_bayes_example():
    x = np.array([[1.0], [1.0], [0.0], [0.0]])
    y = np.array([1, 1, 0, 0])
    model = BernoulliNaiveBayes(alpha=1.0).fit(x, y)
    assert np.allclose(np.exp(model.log_prior), [0.5, 0.5])
    assert model.feature_prob[:, 0].tolist() == [0.25, 0.75]
    assert model.predict_proba([[1.0]])[0] == pytest.approx(0.75)
    assert model.predict([[0.0], [1.0]]).tolist() == [0, 1]


def test_naive_bayes_tie_goes_to_zero():
    model = BernoulliNaiveBayes().fit(np.array([[1.0], [1.0]]), np.array([1, 0]))
    assert model.predict([[1.0]]).tolist() == [0]
    assert model.predict_proba([[1.0]])[0] == pytest.approx(0.5)


def test_naive_bayes_smoothing_keeps_probabilities_open():
    x, y = create_sample_data(n=50, seed=5)
    model = BernoulliNaiveBayes().fit(x, np.zeros_like(y))
    assert np.all((model.feature_prob > 0) & (model.feature_prob < 1))
    assert np.all(np.isfinite(model.log_prior))


def test_input_checks():
    x, y = create_sample_data(n=20)
    for cls in BASELINES.values():
        with pytest.raises(PainFairError, match="fitted"):
            cls().predict(x)
        model = cls().fit(x, y)
        with pytest.raises(ShapeMismatchError):
            model.predict(x[:, :2])
    with pytest.raises(PainFairError, match="positive"):
        rescale_weights([1.0, 0.0], 2)
    assert rescale_weights([2.0, 4.0], 2).tolist() == pytest.approx([2 / 3, 4 / 3])


@pytest.mark.parametrize("name", sorted(BASELINES))
def test_save_and_load_round_trip(tmp_path, name):
    x, y = create_sample_data(n=80, seed=6)
    model = BASELINES[name]().fit(x, y)
    path = model.save(tmp_path / f"{name}.json")
    restored = load_model(json.loads(path.read_text()))
    assert np.allclose(restored.predict_proba(x), model.predict_proba(x))
    assert restored.get_parameter_info() == model.get_parameter_info()
