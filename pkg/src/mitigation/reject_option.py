"""
Reject Option Classification

Scores strictly within ``margin`` of the threshold form the critical region;
there unprivileged instances receive the favorable class and privileged
instances the unfavorable one. Scores outside keep the thresholded class
(score > threshold -> 1).
"""

from typing import Dict, Optional, Sequence

import numpy as np

from src.config.settings import ROC_THRESHOLD, ROC_MARGIN
from src.fairness.metrics import GroupedOutcomes, accuracy, spd
from src.mitigation.base import BaseMitigator, aligned_group
from src.utils.errors import PainFairError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()


def _check(threshold: float, margin: float):
    if not 0.0 < threshold < 1.0:
        raise PainFairError(f"threshold must lie in (0, 1), got {threshold}")
    if not 0.0 <= margin < min(threshold, 1.0 - threshold):
        raise PainFairError(f"margin must lie in [0, {min(threshold, 1.0 - threshold)}), got {margin}")


def roc_adjust(favorable_scores, group, threshold: float = ROC_THRESHOLD,
               margin: float = ROC_MARGIN) -> np.ndarray:
    """Binary predictions after the reject-option rule"""
    _check(threshold, margin)
    scores = np.asarray(favorable_scores, dtype=float).ravel()
    group = aligned_group(group, scores.size, "scores")
    predictions = (scores > threshold).astype(int)
    critical = np.abs(scores - threshold) < margin
    predictions[critical & (group == 0)] = 1
    predictions[critical & (group == 1)] = 0
    return predictions


class RejectOptionClassifier(BaseMitigator):
    """
    Post-processing mitigator

    ``fit`` searches a margin grid on held-out scores for the smallest |SPD|
    whose accuracy stays within ``max_accuracy_drop`` of plain thresholding;
    ties go to the smaller margin.
    """

    stage = "post"

    def __init__(self, threshold: float = ROC_THRESHOLD, margin: float = ROC_MARGIN,
                 max_accuracy_drop: float = 0.05):
        super().__init__(name="RejectOptionClassifier", threshold=threshold, margin=margin,
                         max_accuracy_drop=max_accuracy_drop)
        self.search: Dict[float, Dict[str, float]] = {}

    def _validate_parameters(self) -> None:
        _check(self.parameters["threshold"], self.parameters["margin"])
        if self.parameters["max_accuracy_drop"] < 0:
            raise ValueError("max_accuracy_drop must be non-negative")

    def fit(self, favorable_scores, labels, group, margins: Optional[Sequence[float]] = None,
            weights=None) -> "RejectOptionClassifier":
        threshold = self.parameters["threshold"]
        if margins is None:
            bound = min(threshold, 1.0 - threshold)
            margins = np.linspace(0.0, bound, 11)[:-1]

        baseline = accuracy((np.asarray(favorable_scores) > threshold).astype(int), labels, weights)
        best_margin, best_gap = 0.0, None
        self.search = {}
        for margin in margins:
            predictions = roc_adjust(favorable_scores, group, threshold, float(margin))
            acc = accuracy(predictions, labels, weights)
            gap = abs(spd(GroupedOutcomes(predictions, group, weights=weights)))
            self.search[float(margin)] = {"accuracy": acc, "abs_spd": gap}
            if acc < baseline - self.parameters["max_accuracy_drop"]:
                continue
            if best_gap is None or gap < best_gap:
                best_margin, best_gap = float(margin), gap

        self.update_parameters(margin=best_margin)
        self._mark_fitted()
        logger.info(f"Reject option margin {best_margin:.3f} selected (|SPD| {best_gap})")
        return self

    def predict(self, favorable_scores, group) -> np.ndarray:
        return roc_adjust(favorable_scores, group, self.parameters["threshold"], self.parameters["margin"])
