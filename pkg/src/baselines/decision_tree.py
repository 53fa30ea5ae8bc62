"""Weighted entropy decision tree"""
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.baselines.base import BaseClassifier
from src.config.settings import TREE_MAX_DEPTH

GAIN_TIE_TOLERANCE = 1e-12


def weighted_entropy(positive_mass, total_mass):
    """Binary entropy in bits of the positive share; 0 for pure or empty nodes"""
    p = np.divide(positive_mass, total_mass, out=np.zeros_like(np.asarray(total_mass, dtype=float)),
                  where=np.asarray(total_mass) > 0)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return h


def best_split(x: np.ndarray, y: np.ndarray, weights: np.ndarray) -> Optional[Tuple[int, float, float]]:
    """
    (feature, threshold, gain) maximizing weighted information gain

    Thresholds are midpoints between consecutive distinct values; rows with
    x <= threshold go left. Ties go to the lowest feature index, then the
    lowest threshold. None when no feature has two distinct values.
    """
    total = weights.sum()
    positive = weights[y == 1].sum()
    parent = float(weighted_entropy(positive, total))

    best = None
    for feature in range(x.shape[1]):
        order = np.argsort(x[:, feature], kind="stable")
        values, w, yy = x[order, feature], weights[order], y[order]
        boundaries = np.nonzero(values[1:] > values[:-1])[0]
        if boundaries.size == 0:
            continue
        left_mass = np.cumsum(w)[boundaries]
        left_pos = np.cumsum(w * yy)[boundaries]
        right_mass, right_pos = total - left_mass, positive - left_pos
        children = (left_mass * weighted_entropy(left_pos, left_mass)
                    + right_mass * weighted_entropy(right_pos, right_mass)) / total
        gains = parent - children
        i = int(np.argmax(gains))  # first maximum = lowest threshold
        if best is None or gains[i] > best[2] + GAIN_TIE_TOLERANCE:
            threshold = 0.5 * (values[boundaries[i]] + values[boundaries[i] + 1])
            best = (feature, float(threshold), float(gains[i]))
    return best


class DecisionTree(BaseClassifier):
    """
    Greedy tree splitting impure nodes on the best weighted information
    gain (zero gain allowed, so XOR-like structure is reachable) until
    ``max_depth``. Leaves predict the weighted majority, ties to class 0.
    """

    def __init__(self, max_depth: int = TREE_MAX_DEPTH):
        super().__init__(name="DecisionTree", max_depth=max_depth, criterion="entropy")
        self.root: Optional[Dict[str, Any]] = None

    def _validate_parameters(self) -> None:
        if self.parameters["max_depth"] < 1:
            raise ValueError("max_depth must be at least 1")

    def _leaf(self, y: np.ndarray, weights: np.ndarray) -> Dict[str, Any]:
        proba = float(weights[y == 1].sum() / weights.sum())
        return {"leaf": True, "proba": proba, "value": int(proba > 0.5)}

    def _grow(self, x: np.ndarray, y: np.ndarray, weights: np.ndarray, depth: int) -> Dict[str, Any]:
        leaf = self._leaf(y, weights)
        if depth >= self.parameters["max_depth"] or leaf["proba"] in (0.0, 1.0):
            return leaf
        split = best_split(x, y, weights)
        if split is None:
            return leaf
        feature, threshold, gain = split
        left = x[:, feature] <= threshold
        return {
            "leaf": False, "feature": feature, "threshold": threshold, "gain": gain,
            "left": self._grow(x[left], y[left], weights[left], depth + 1),
            "right": self._grow(x[~left], y[~left], weights[~left], depth + 1),
        }

    def _fit(self, x: np.ndarray, y: np.ndarray, weights: np.ndarray) -> None:
        self.root = self._grow(x, y, weights, 0)

    def _proba_row(self, row: np.ndarray) -> float:
        node = self.root
        while not node["leaf"]:
            node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
        return node["proba"]

    def predict_proba(self, x) -> np.ndarray:
        x = self._check_input(x)
        return np.array([self._proba_row(row) for row in x])

    def depth(self, node: Optional[Dict[str, Any]] = None) -> int:
        node = node or self.root
        if node["leaf"]:
            return 0
        return 1 + max(self.depth(node["left"]), self.depth(node["right"]))

    def _state(self) -> Dict[str, Any]:
        return {"root": self.root}

    def _load_state(self, state: Dict[str, Any]) -> None:
        self.root = state["root"]
