"""Weighted Bernoulli naive Bayes with Laplace smoothing"""
from typing import Any, Dict

import numpy as np

from src.baselines.base import BaseClassifier
from src.config.settings import NB_BINARIZE_THRESHOLD


class BernoulliNaiveBayes(BaseClassifier):
    """
    Features are binarized (x > threshold -> 1) and modelled as independent
    Bernoulli variables per class. Priors and feature probabilities are
    smoothed with ``alpha`` pseudo-counts per outcome, so no probability is 0.
    """

    def __init__(self, alpha: float = 1.0, binarize: float = NB_BINARIZE_THRESHOLD):
        super().__init__(name="BernoulliNaiveBayes", alpha=alpha, binarize=binarize)
        self.log_prior = None
        self.feature_prob = None

    def _validate_parameters(self) -> None:
        if self.parameters["alpha"] <= 0:
            raise ValueError("alpha must be positive")

    def binarize(self, x: np.ndarray) -> np.ndarray:
        return (x > self.parameters["binarize"]).astype(float)

    def _fit(self, x: np.ndarray, y: np.ndarray, weights: np.ndarray) -> None:
        alpha = self.parameters["alpha"]
        xb = self.binarize(x)
        class_mass = np.array([weights[y == c].sum() for c in (0, 1)])
        feature_mass = np.vstack([weights[y == c] @ xb[y == c] for c in (0, 1)])
        self.log_prior = np.log((class_mass + alpha) / (class_mass.sum() + 2 * alpha))
        self.feature_prob = (feature_mass + alpha) / (class_mass[:, None] + 2 * alpha)

    def joint_log_likelihood(self, x) -> np.ndarray:
        xb = self.binarize(self._check_input(x))
        log_p, log_q = np.log(self.feature_prob), np.log1p(-self.feature_prob)
        return self.log_prior + xb @ log_p.T + (1.0 - xb) @ log_q.T

    def predict_proba(self, x) -> np.ndarray:
        jll = self.joint_log_likelihood(x)
        return 1.0 / (1.0 + np.exp(jll[:, 0] - jll[:, 1]))

    def predict(self, x) -> np.ndarray:
        jll = self.joint_log_likelihood(x)
        return (jll[:, 1] > jll[:, 0]).astype(int)

    def _state(self) -> Dict[str, Any]:
        return {"log_prior": self.log_prior.tolist(), "feature_prob": self.feature_prob.tolist()}

    def _load_state(self, state: Dict[str, Any]) -> None:
        self.log_prior = np.array(state["log_prior"], dtype=float)
        self.feature_prob = np.array(state["feature_prob"], dtype=float)
