"""
Preprocessing Module

Label derivation, channel imputation, min-max scaling and demographic
encoding. All functions are pure.
"""

from dataclasses import dataclass
from datetime import date
from typing import Dict, Iterable, List, Literal, Sequence, Tuple

import numpy as np
import pandas as pd

from src.cohort.models import (
    DayRecord, EncodingPlan, PainAssessment, ProtectedProfile, privileged_flag,
    normalize_category
)
from src.utils.errors import CohortError, ImputationError, PainFairError

__all__ = [
    "derive_labels", "impute", "MinMaxRanges", "minmax_normalize", "apply_minmax",
    "inverse_minmax", "privileged_flag", "demographic_values", "encode_raw_vector",
    "encode_demographics",
]


def derive_labels(assessments: Sequence[PainAssessment]) -> List[Tuple[date, int]]:
    """
    Turn a participant's assessments into recovery labels.

    Each assessment after the first gets label 1 when its VAS score is lower
    than the previous one, else 0. Fewer than two assessments yield nothing.
    """
    ordered = sorted(assessments, key=lambda a: a.date)
    if len(ordered) < 2:
        return []

    labels = []
    for previous, current in zip(ordered, ordered[1:]):
        if current.date == previous.date:
            raise CohortError(
                f"{current.participant_id}: two assessments on {current.date}"
            )
        labels.append((current.date, int(current.vas_score < previous.vas_score)))
    return labels


def impute(series, policy: Literal["mean", "linear"] = "linear") -> np.ndarray:
    """
    Fill missing (NaN/None) slots of a channel.

    mean: the channel's own present-value mean.
    linear: linear interpolation between nearest present neighbours; edge
    gaps take the nearest present value. Present slots are never changed.
    """
    values = np.array(series, dtype=float)
    missing = np.isnan(values)
    if missing.all():
        raise ImputationError("channel empty")
    if not missing.any():
        return values

    present_idx = np.flatnonzero(~missing)
    if policy == "mean":
        values[missing] = values[present_idx].mean()
    elif policy == "linear":
        # np.interp holds the edge values constant outside the present range
        values[missing] = np.interp(np.flatnonzero(missing), present_idx, values[present_idx])
    else:
        raise ImputationError(f"Unknown imputation policy '{policy}'")
    return values


@dataclass(frozen=True)
class MinMaxRanges:
    """Per-column (min, max) fitted on training data."""
    mins: np.ndarray
    maxs: np.ndarray

    def to_dict(self) -> Dict:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, payload: Dict) -> "MinMaxRanges":
        return cls(np.asarray(payload["mins"], dtype=float), np.asarray(payload["maxs"], dtype=float))


def _check_finite(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise PainFairError(f"expected a 2-D matrix, got {matrix.ndim} dimensions")
    if not np.all(np.isfinite(matrix)):
        raise PainFairError("min-max input contains non-finite values")
    return matrix


def apply_minmax(matrix, ranges: MinMaxRanges) -> np.ndarray:
    """Scale with previously fitted ranges; constant columns map to 0, output clamped to [0, 1]."""
    matrix = _check_finite(matrix)
    span = ranges.maxs - ranges.mins
    constant = span == 0
    safe_span = np.where(constant, 1.0, span)
    scaled = (matrix - ranges.mins) / safe_span
    scaled[:, constant] = 0.0
    return np.clip(scaled, 0.0, 1.0)


def minmax_normalize(matrix) -> Tuple[np.ndarray, MinMaxRanges]:
    """Fit per-column min/max on ``matrix`` and scale it to [0, 1]."""
    matrix = _check_finite(matrix)
    if matrix.shape[0] == 0:
        raise PainFairError("cannot fit min-max ranges on an empty matrix")
    ranges = MinMaxRanges(matrix.min(axis=0), matrix.max(axis=0))
    return apply_minmax(matrix, ranges), ranges


def inverse_minmax(scaled, ranges: MinMaxRanges) -> np.ndarray:
    """Map scaled values back to the original units (exact for non-constant columns)."""
    scaled = np.asarray(scaled, dtype=float)
    return scaled * (ranges.maxs - ranges.mins) + ranges.mins


def demographic_values(profile: ProtectedProfile, slots: Sequence[str]) -> List[float]:
    """
    Scalar demographic slots of the raw encoding.

    age is age/100; every other slot is its privileged indicator.
    """
    values = []
    for slot in slots:
        if slot == "age":
            values.append(profile.age / 100.0)
        else:
            values.append(float(privileged_flag(profile, slot)))
    return values


def encode_raw_vector(day: DayRecord, profile: ProtectedProfile, plan: EncodingPlan) -> np.ndarray:
    """Demographic slots + imputed 1440 heart-rate minutes + imputed 1440 step minutes."""
    hr = impute(day.heart_rate, plan.imputation)
    steps = impute(day.steps, plan.imputation)
    return np.concatenate([demographic_values(profile, plan.demographic_slots), hr, steps])


def raw_vector_columns(plan: EncodingPlan, minutes: int) -> List[str]:
    columns = [f"demographic.{slot}" for slot in plan.demographic_slots]
    columns += [f"raw.hr.{m}" for m in range(minutes)]
    columns += [f"raw.steps.{m}" for m in range(minutes)]
    return columns


def encode_demographics(profiles: Iterable[ProtectedProfile]) -> pd.DataFrame:
    """One-hot encode the categorical protected attributes, one row per participant."""
    frame = pd.DataFrame([
        {
            "participant_id": p.participant_id,
            "gender": normalize_category(p.gender),
            "race": normalize_category(p.race),
            "ethnicity": normalize_category(p.ethnicity),
            "age_band": p.age_band,
            "dementia": normalize_category(p.dementia),
        }
        for p in profiles
    ])
    if frame.empty:
        return frame
    encoded = pd.get_dummies(
        frame.set_index("participant_id"),
        columns=["gender", "race", "ethnicity", "age_band", "dementia"],
        dtype=int,
    )
    return encoded.sort_index().reindex(sorted(encoded.columns), axis=1)
