"""
Fairness Metrics Module

Group fairness metrics over binary predictions, binary labels and a binary
privileged indicator (1 = privileged), with fair/biased verdicts.

All rates are weight-weighted; weights default to 1. Differences are
unprivileged minus privileged, ratios unprivileged over privileged.
"""

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Dict, Optional, Tuple

import numpy as np

from src.config.settings import (
    DIFFERENCE_FAIR_RANGE, DISPARATE_IMPACT_FAIR_RANGE, THEIL_FAIR_RANGE
)
from src.utils.errors import DegenerateGroupError, PainFairError, UndefinedMetricError

METRICS = ("spd", "di", "eod", "aod", "theil")

FAIR = "fair"
FAVORS_PRIVILEGED = "favors_privileged"
FAVORS_UNPRIVILEGED = "favors_unprivileged"
UNEQUAL_BENEFIT = "unequal_benefit"
UNDEFINED = "undefined"

FAIR_RANGES = {
    "spd": DIFFERENCE_FAIR_RANGE,
    "di": DISPARATE_IMPACT_FAIR_RANGE,
    "eod": DIFFERENCE_FAIR_RANGE,
    "aod": DIFFERENCE_FAIR_RANGE,
    "theil": THEIL_FAIR_RANGE,
}

IDEAL_VALUES = {"spd": 0.0, "di": 1.0, "eod": 0.0, "aod": 0.0, "theil": 0.0}


def _binary(values, name: str) -> np.ndarray:
    arr = np.asarray(values).ravel()
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise PainFairError(f"{name} must be binary (0/1)")
    return arr.astype(int)


@dataclass(frozen=True, eq=False)
class GroupedOutcomes:
    """Predictions, optional labels, privileged indicator and optional weights"""
    predictions: np.ndarray
    group: np.ndarray
    labels: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        predictions = _binary(self.predictions, "predictions")
        group = _binary(self.group, "group")
        n = predictions.size
        if group.size != n:
            raise PainFairError(f"group has {group.size} entries for {n} predictions")
        object.__setattr__(self, "predictions", predictions)
        object.__setattr__(self, "group", group)

        if self.labels is not None:
            labels = _binary(self.labels, "labels")
            if labels.size != n:
                raise PainFairError(f"labels has {labels.size} entries for {n} predictions")
            object.__setattr__(self, "labels", labels)

        weights = np.ones(n) if self.weights is None else np.asarray(self.weights, dtype=float).ravel()
        if weights.size != n:
            raise PainFairError(f"weights has {weights.size} entries for {n} predictions")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise PainFairError("weights must be positive and finite")
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.predictions.size

    def swapped(self) -> "GroupedOutcomes":
        """Same outcomes with group polarity inverted"""
        return GroupedOutcomes(self.predictions, 1 - self.group, self.labels, self.weights)

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise PainFairError("this metric needs ground-truth labels")
        return self.labels

    def require_both_groups(self):
        if not (np.any(self.group == 1) and np.any(self.group == 0)):
            raise DegenerateGroupError("degenerate group: one side of the protected attribute is empty")

    def rate(self, privileged: int, label: Optional[int] = None, cell: str = "favorable rate") -> float:
        """Weighted P(prediction = 1 | group [, label])"""
        mask = self.group == privileged
        if label is not None:
            mask &= self.require_labels() == label
        denom = float(np.sum(self.weights[mask]))
        if denom == 0:
            side = "privileged" if privileged else "unprivileged"
            raise UndefinedMetricError(f"undefined {cell} for the {side} group")
        return float(np.sum(self.weights[mask] * self.predictions[mask])) / denom


def spd(g: GroupedOutcomes) -> float:
    """Statistical parity difference: P(Y^=1 | unprv) - P(Y^=1 | prv)"""
    g.require_both_groups()
    return g.rate(0) - g.rate(1)


def disparate_impact(g: GroupedOutcomes) -> float:
    """
    P(Y^=1 | unprv) / P(Y^=1 | prv).

    A zero privileged rate gives +inf when the unprivileged rate is positive
    and 1.0 when both rates are zero.
    """
    g.require_both_groups()
    unprivileged, privileged = g.rate(0), g.rate(1)
    if privileged == 0:
        return math.inf if unprivileged > 0 else 1.0
    return unprivileged / privileged


def eod(g: GroupedOutcomes) -> float:
    """Equal opportunity difference: TPR(unprv) - TPR(prv)"""
    g.require_labels()
    g.require_both_groups()
    return g.rate(0, label=1, cell="TPR") - g.rate(1, label=1, cell="TPR")


def aod(g: GroupedOutcomes) -> float:
    """Average odds difference: ((FPR_u - FPR_p) + (TPR_u - TPR_p)) / 2"""
    g.require_labels()
    g.require_both_groups()
    tpr_diff = g.rate(0, label=1, cell="TPR") - g.rate(1, label=1, cell="TPR")
    fpr_diff = g.rate(0, label=0, cell="FPR") - g.rate(1, label=0, cell="FPR")
    return (fpr_diff + tpr_diff) / 2.0


def theil(predictions, labels, weights=None) -> float:
    """
    Theil index of per-instance benefits b = y^ - y + 1.

    (1/W) sum_i w_i (b_i/mu) ln(b_i/mu), mu the weighted mean benefit, 0 ln 0 = 0.
    """
    preds = _binary(predictions, "predictions")
    labs = _binary(labels, "labels")
    if preds.size == 0:
        raise PainFairError("Theil index of an empty sample")
    if labs.size != preds.size:
        raise PainFairError(f"labels has {labs.size} entries for {preds.size} predictions")
    w = np.ones(preds.size) if weights is None else np.asarray(weights, dtype=float).ravel()

    benefit = (preds - labs + 1).astype(float)
    mu = float(np.sum(w * benefit) / np.sum(w))
    if mu == 0:
        raise UndefinedMetricError("Theil index undefined: mean benefit is 0")
    ratio = benefit / mu
    terms = np.zeros_like(ratio)
    positive = ratio > 0
    terms[positive] = ratio[positive] * np.log(ratio[positive])
    return float(np.sum(w * terms) / np.sum(w))


def accuracy(predictions, labels, weights=None) -> float:
    preds = _binary(predictions, "predictions")
    labs = _binary(labels, "labels")
    w = np.ones(preds.size) if weights is None else np.asarray(weights, dtype=float).ravel()
    if preds.size == 0:
        raise PainFairError("accuracy of an empty sample")
    return float(np.sum(w * (preds == labs)) / np.sum(w))


def dataset_bias(labels, group, weights=None) -> Tuple[float, float]:
    """(SPD, DI) of the ground-truth favorable rates"""
    g = GroupedOutcomes(predictions=labels, group=group, weights=weights)
    return spd(g), disparate_impact(g)


def confusion_by_group(g: GroupedOutcomes) -> Dict[str, Dict[str, float]]:
    """Weighted tp/fp/tn/fn per side of the protected attribute"""
    labels = g.require_labels()
    table = {}
    for name, side in (("privileged", 1), ("unprivileged", 0)):
        mask = g.group == side
        w, p, y = g.weights[mask], g.predictions[mask], labels[mask]
        table[name] = {
            "tp": float(np.sum(w[(p == 1) & (y == 1)])),
            "fp": float(np.sum(w[(p == 1) & (y == 0)])),
            "tn": float(np.sum(w[(p == 0) & (y == 0)])),
            "fn": float(np.sum(w[(p == 0) & (y == 1)])),
        }
    return table


def verdict(metric: str, value: Optional[float]) -> str:
    """
    Verdict for one metric value against its inclusive fair range.

    spd/eod/aod/di: fair, favors_unprivileged above the range,
    favors_privileged below it. theil: fair or unequal_benefit.
    """
    if metric not in FAIR_RANGES:
        raise PainFairError(f"Unknown fairness metric '{metric}'")
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return UNDEFINED
    low, high = FAIR_RANGES[metric]
    if low <= value <= high:
        return FAIR
    if metric == "theil":
        return UNEQUAL_BENEFIT
    return FAVORS_UNPRIVILEGED if value > high else FAVORS_PRIVILEGED


@dataclass
class FairnessReport:
    """
    The five metric values with verdicts.

    Metrics that could not be computed are None, with the reason in ``errors``.
    """
    spd: Optional[float] = None
    di: Optional[float] = None
    eod: Optional[float] = None
    aod: Optional[float] = None
    theil: Optional[float] = None
    verdicts: Dict[str, str] = field(default_factory=dict)
    errors: Dict[str, str] = field(default_factory=dict)

    def value(self, metric: str) -> Optional[float]:
        return getattr(self, metric)

    @property
    def fair_count(self) -> int:
        return sum(1 for v in self.verdicts.values() if v == FAIR)

    def recomputed_verdicts(self) -> Dict[str, str]:
        return {metric: verdict(metric, self.value(metric)) for metric in METRICS}

    def is_consistent(self) -> bool:
        return self.recomputed_verdicts() == self.verdicts

    def to_dict(self) -> Dict:
        payload = asdict(self)
        payload["fair_count"] = self.fair_count
        return payload

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, payload: Dict) -> "FairnessReport":
        fields = {k: payload.get(k) for k in METRICS}
        return cls(**fields, verdicts=dict(payload.get("verdicts", {})), errors=dict(payload.get("errors", {})))

    @classmethod
    def from_json(cls, text: str) -> "FairnessReport":
        return cls.from_dict(json.loads(text))

    def summary(self) -> str:
        """Generate formatted summary string."""

        def fmt(metric):
            value = self.value(metric)
            return f"{value:>10.4f}" if value is not None else f"{'n/a':>10}"

        lines = ["=" * 60, "FAIRNESS SUMMARY", "=" * 60, ""]
        labels = {
            "spd": "Statistical Parity Diff",
            "di": "Disparate Impact",
            "eod": "Equal Opportunity Diff",
            "aod": "Average Odds Diff",
            "theil": "Theil Index",
        }
        for metric in METRICS:
            lines.append(f"  {labels[metric]:<25}{fmt(metric)}  {self.verdicts.get(metric, UNDEFINED)}")
        lines += ["", f"  Fair metrics: {self.fair_count}/{len(METRICS)}"]
        for metric, message in sorted(self.errors.items()):
            lines.append(f"  {metric}: {message}")
        lines += ["", "=" * 60]
        return "\n".join(lines)


def report(g: GroupedOutcomes) -> FairnessReport:
    """All five metrics with verdicts; a failing metric becomes an undefined entry"""
    values, errors = {}, {}
    computations = {
        "spd": lambda: spd(g),
        "di": lambda: disparate_impact(g),
        "eod": lambda: eod(g),
        "aod": lambda: aod(g),
        "theil": lambda: theil(g.predictions, g.require_labels(), g.weights),
    }
    for metric, compute in computations.items():
        try:
            values[metric] = float(compute())
        except PainFairError as e:
            values[metric] = None
            errors[metric] = str(e)

    result = FairnessReport(**values, errors=errors)
    result.verdicts = result.recomputed_verdicts()
    return result
