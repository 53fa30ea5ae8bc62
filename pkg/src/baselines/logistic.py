"""Weighted logistic regression by full-batch gradient descent"""
from typing import Any, Dict, Tuple

import numpy as np

from src.baselines.base import BaseClassifier
from src.config.settings import LOGISTIC_MAX_ITER, LOGISTIC_TOLERANCE, LOGISTIC_LEARNING_RATE
from src.utils.errors import TrainingDivergedError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()


def logistic_loss_and_gradient(theta: np.ndarray, x: np.ndarray, y: np.ndarray,
                               weights: np.ndarray, l2: float) -> Tuple[float, np.ndarray]:
    """
    Weighted mean BCE plus (l2 / 2) ||w||^2; theta = [w..., bias]

    The bias is not penalized.
    """
    w, b = theta[:-1], theta[-1]
    z = x @ w + b
    # -[y log s(z) + (1 - y) log(1 - s(z))] = log(1 + e^z) - y z
    per_instance = np.logaddexp(0.0, z) - y * z
    total = weights.sum()
    loss = float(np.sum(weights * per_instance) / total + 0.5 * l2 * np.dot(w, w))
    residual = weights * (1.0 / (1.0 + np.exp(-z)) - y) / total
    grad = np.concatenate([x.T @ residual + l2 * w, [residual.sum()]])
    return loss, grad


class LogisticRegression(BaseClassifier):
    """
    Stops when the loss changes by less than ``tolerance`` or after
    ``max_iter`` steps. The step size is min(learning_rate, 1 / L), L the
    Lipschitz constant of the loss gradient.
    """

    def __init__(self, l2: float = 1e-4, max_iter: int = LOGISTIC_MAX_ITER,
                 tolerance: float = LOGISTIC_TOLERANCE, learning_rate: float = LOGISTIC_LEARNING_RATE):
        super().__init__(name="LogisticRegression", l2=l2, max_iter=max_iter,
                         tolerance=tolerance, learning_rate=learning_rate)
        self.coef = None
        self.intercept = 0.0
        self.n_iter = 0

    def _validate_parameters(self) -> None:
        if self.parameters["l2"] < 0:
            raise ValueError("l2 must be non-negative")
        if self.parameters["max_iter"] < 1:
            raise ValueError("max_iter must be at least 1")
        if self.parameters["learning_rate"] <= 0:
            raise ValueError("learning_rate must be positive")

    def _fit(self, x: np.ndarray, y: np.ndarray, weights: np.ndarray) -> None:
        l2 = self.parameters["l2"]
        augmented = np.column_stack([x, np.ones(len(y))])
        lipschitz = 0.25 * np.linalg.norm(np.sqrt(weights)[:, None] * augmented, 2) ** 2 / weights.sum() + l2
        step = min(self.parameters["learning_rate"], 1.0 / lipschitz)

        theta = np.zeros(x.shape[1] + 1)
        loss, grad = logistic_loss_and_gradient(theta, x, y, weights, l2)
        for iteration in range(1, self.parameters["max_iter"] + 1):
            theta = theta - step * grad
            new_loss, grad = logistic_loss_and_gradient(theta, x, y, weights, l2)
            if not np.isfinite(new_loss):
                raise TrainingDivergedError("logistic regression loss became non-finite",
                                            {"iteration": iteration, "loss": new_loss})
            converged = abs(loss - new_loss) < self.parameters["tolerance"]
            loss = new_loss
            if converged:
                break
        self.n_iter = iteration
        self.coef, self.intercept = theta[:-1], float(theta[-1])
        logger.info(f"Logistic regression stopped after {iteration} iterations (loss {loss:.6f})")

    def decision_function(self, x) -> np.ndarray:
        return self._check_input(x) @ self.coef + self.intercept

    def predict_proba(self, x) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-self.decision_function(x)))

    def _state(self) -> Dict[str, Any]:
        return {"coef": self.coef.tolist(), "intercept": self.intercept, "n_iter": self.n_iter}

    def _load_state(self, state: Dict[str, Any]) -> None:
        self.coef = np.array(state["coef"], dtype=float)
        self.intercept = float(state["intercept"])
        self.n_iter = int(state.get("n_iter", 0))
