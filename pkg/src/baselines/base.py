"""
Base Classifier Interface

Abstract base class for the weighted baseline classifiers. Every trainer
accepts instance weights, rescaled to mean 1 before fitting so a uniform
scaling of the weights never changes the learned model.
"""

import json
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.utils.errors import PainFairError, ShapeMismatchError


class BaseClassifier(ABC):
    """
    Abstract base class for all baseline classifiers.

    Attributes:
        name (str): Name of the classifier
        parameters (Dict[str, Any]): Hyper-parameters
        n_features (int): Feature count seen by ``fit``
    """

    def __init__(self, name: str, **parameters):
        self.name = name
        self.parameters = parameters
        self.n_features: Optional[int] = None
        self._validate_parameters()

    @abstractmethod
    def _validate_parameters(self) -> None:
        """
        Validate hyper-parameters.

        Raises:
            ValueError: If parameters are invalid
        """
        pass

    @abstractmethod
    def _fit(self, x: np.ndarray, y: np.ndarray, weights: np.ndarray) -> None:
        pass

    @abstractmethod
    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Favorable-class probability per row"""
        pass

    @abstractmethod
    def _state(self) -> Dict[str, Any]:
        pass

    @abstractmethod
    def _load_state(self, state: Dict[str, Any]) -> None:
        pass

    def fit(self, x, y, weights=None) -> "BaseClassifier":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int).ravel()
        if x.ndim != 2 or x.shape[0] != y.size or y.size == 0:
            raise PainFairError(f"cannot fit on inputs of shape {x.shape} with {y.size} labels")
        self.n_features = x.shape[1]
        self._fit(x, y, rescale_weights(weights, y.size))
        return self

    def predict(self, x) -> np.ndarray:
        # probability 0.5 goes to class 0
        return (self.predict_proba(x) > 0.5).astype(int)

    def _check_input(self, x) -> np.ndarray:
        if self.n_features is None:
            raise PainFairError(f"{self.name} must be fitted before prediction")
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.n_features:
            raise ShapeMismatchError(f"{self.name} input", ("rows", self.n_features), x.shape)
        return x

    def get_parameter_info(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'parameters': self.parameters
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "parameters": self.parameters,
            "n_features": self.n_features,
            "state": self._state(),
        }

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), sort_keys=True))
        return path

    def __repr__(self) -> str:
        params_str = ', '.join(f"{k}={v}" for k, v in self.parameters.items())
        return f"{self.name}({params_str})"


def rescale_weights(weights, n: int) -> np.ndarray:
    if weights is None:
        return np.ones(n)
    weights = np.asarray(weights, dtype=float).ravel()
    if weights.size != n:
        raise PainFairError(f"{weights.size} weights for {n} instances")
    if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise PainFairError("instance weights must be positive and finite")
    return weights / weights.mean()
