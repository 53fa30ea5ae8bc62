"""
Baselines Module

Weighted classical classifiers compared against the CNN: logistic
regression, Bernoulli naive Bayes and an entropy decision tree.
"""

from typing import Any, Dict

from .base import BaseClassifier, rescale_weights
from .logistic import LogisticRegression
from .naive_bayes import BernoulliNaiveBayes
from .decision_tree import DecisionTree

BASELINES = {
    'logistic': LogisticRegression,
    'naive_bayes': BernoulliNaiveBayes,
    'decision_tree': DecisionTree,
}

_BY_NAME = {cls.__name__: cls for cls in BASELINES.values()}


def load_model(payload: Dict[str, Any]) -> BaseClassifier:
    """Rebuild a fitted classifier from ``BaseClassifier.to_dict`` output"""
    parameters = {k: v for k, v in payload["parameters"].items() if k != "criterion"}
    model = _BY_NAME[payload["name"]](**parameters)
    model.n_features = payload["n_features"]
    model._load_state(payload["state"])
    return model


__all__ = [
    'BaseClassifier',
    'rescale_weights',
    'LogisticRegression',
    'BernoulliNaiveBayes',
    'DecisionTree',
    'BASELINES',
    'load_model',
]
