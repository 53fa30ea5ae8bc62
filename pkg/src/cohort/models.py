"""
Cohort Data Model

Immutable containers for participant-days, protected profiles, pain
assessments and the labelled instances derived from them.
"""

from dataclasses import dataclass, field
from datetime import date
from types import MappingProxyType
from typing import Dict, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from src.config.settings import (
    settings, VAS_MIN, VAS_MAX, PRIVILEGED_GENDER, PRIVILEGED_RACE,
    PRIVILEGED_ETHNICITY, PRIVILEGED_DEMENTIA
)
from src.utils.errors import CohortError

Channel = Literal["hr", "steps"]
Domain = Literal["statistical", "temporal", "spectral"]
Variant = Literal["mathematical", "logarithmic", "cosine", "logcosh"]

DEMOGRAPHIC_SLOTS = ("age", "gender", "race", "ethnicity", "dementia")

CATEGORY_ALIASES = {
    "m": "male",
    "man": "male",
    "f": "female",
    "woman": "female",
    "not_hispanic_or_latino": "not_hispanic",
    "not_hispanic_or_latin": "not_hispanic",
    "non_hispanic": "not_hispanic",
    "hispanic_or_latino": "hispanic",
    "hispanic_latino": "hispanic",
    "not_hispanic_latino": "not_hispanic",
    "no": "absent",
    "none": "absent",
    "yes": "present",
    "0": "absent",
    "1": "present",
    "false": "absent",
    "true": "present",
}


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


class EncodingPlan(BaseModel):
    """
    How a participant-day becomes a model input vector.

    raw mode: demographic slots + 1440 heart-rate minutes + 1440 step minutes.
    features mode: catalog features per selected domain and channel,
    optionally passed through one or more day-over-day deviance variants,
    with the demographic slots prepended when ``include_demographics`` is set.
    """
    model_config = ConfigDict(frozen=True)

    mode: Literal["raw", "features"] = "raw"
    demographic_slots: Tuple[str, ...] = ("age", "gender", "dementia")
    imputation: Literal["mean", "linear"] = "linear"
    domains: Tuple[Domain, ...] = ("statistical", "temporal", "spectral")
    channels: Tuple[Channel, ...] = ("hr", "steps")
    variants: Tuple[Variant, ...] = ()
    expand_multivalued: bool = False
    include_demographics: bool = False

    @field_validator("demographic_slots")
    @classmethod
    def _check_slots(cls, value):
        unknown = [slot for slot in value if slot not in DEMOGRAPHIC_SLOTS]
        if unknown:
            raise ValueError(f"Unknown demographic slots: {unknown}")
        return value

    @field_validator("domains", "channels")
    @classmethod
    def _non_empty(cls, value):
        if len(value) == 0:
            raise ValueError("at least one entry required")
        return value

    def raw_vector_length(self) -> int:
        return len(self.demographic_slots) + 2 * settings.minutes_per_day


@dataclass(frozen=True, eq=False)
class DayRecord:
    """
    One participant-day of minute-level wearable data.

    Missing minutes are stored as NaN; ``missing_mask`` exposes them per channel.
    """
    participant_id: str
    date: date
    heart_rate: np.ndarray
    steps: np.ndarray

    def __post_init__(self):
        hr = _frozen_array(self.heart_rate)
        steps = _frozen_array(self.steps)
        object.__setattr__(self, "heart_rate", hr)
        object.__setattr__(self, "steps", steps)

        expected = settings.minutes_per_day
        for name, channel in (("heart_rate", hr), ("steps", steps)):
            if channel.shape != (expected,):
                raise CohortError(
                    f"{self.participant_id} {self.date}: {name} has {channel.size} slots, expected {expected}"
                )
            present = channel[~np.isnan(channel)]
            if not np.all(np.isfinite(present)) or np.any(present < 0):
                raise CohortError(f"{self.participant_id} {self.date}: {name} has negative or non-finite values")

        present_steps = steps[~np.isnan(steps)]
        if np.any(present_steps != np.round(present_steps)):
            raise CohortError(f"{self.participant_id} {self.date}: steps must be integer counts")

    def missing_mask(self, channel: str) -> np.ndarray:
        return np.isnan(self.channel(channel))

    def missing_fraction(self, channel: str) -> float:
        return float(self.missing_mask(channel).mean())

    def channel(self, name: str) -> np.ndarray:
        if name in ("hr", "heart_rate"):
            return self.heart_rate
        if name == "steps":
            return self.steps
        raise KeyError(f"Unknown channel '{name}'")


@dataclass(frozen=True)
class ProtectedProfile:
    """The five protected attributes of one participant."""
    participant_id: str
    gender: str
    race: str
    ethnicity: str
    age: int
    dementia: str

    @property
    def age_band(self) -> str:
        return "under_65" if self.age < settings.elderly_age_cutoff else "65_plus"

    @property
    def privileged(self) -> Dict[str, int]:
        return {attr: privileged_flag(self, attr) for attr in settings.protected_attributes}


def normalize_category(value: str) -> str:
    """Lower-case, trim and snake-case a categorical cell; resolve known aliases."""
    key = str(value).strip().lower().replace("-", " ").replace("/", " ")
    key = "_".join(key.split())
    return CATEGORY_ALIASES.get(key, key)


def privileged_flag(profile: ProtectedProfile, attribute: str) -> int:
    """
    1 iff the profile sits in the privileged category of ``attribute``.

    Privileged: male, Asian, not Hispanic/Latino, younger than 65, no dementia.
    """
    if attribute == "gender":
        return int(normalize_category(profile.gender) == PRIVILEGED_GENDER)
    if attribute == "race":
        return int(normalize_category(profile.race) == PRIVILEGED_RACE)
    if attribute == "ethnicity":
        return int(normalize_category(profile.ethnicity) == PRIVILEGED_ETHNICITY)
    if attribute == "age":
        return int(profile.age < settings.elderly_age_cutoff)
    if attribute == "dementia":
        return int(normalize_category(profile.dementia) == PRIVILEGED_DEMENTIA)
    raise CohortError(f"Unknown protected attribute '{attribute}'")


@dataclass(frozen=True)
class PainAssessment:
    """A clinician-recorded VAS pain score."""
    participant_id: str
    date: date
    vas_score: int

    def __post_init__(self):
        if not (VAS_MIN <= self.vas_score <= VAS_MAX):
            raise CohortError(f"VAS score {self.vas_score} outside [0, 10]")


@dataclass(frozen=True, eq=False)
class LabeledInstance:
    """Model input vector + recovery label + privileged indicators."""
    participant_id: str
    date: date
    input_vector: np.ndarray
    label: int
    groups: Mapping[str, int]
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "input_vector", _frozen_array(self.input_vector))
        object.__setattr__(self, "groups", MappingProxyType(dict(self.groups)))
        if self.label not in (0, 1):
            raise CohortError(f"label must be 0 or 1, got {self.label}")
        if not self.weight > 0:
            raise CohortError(f"weight must be positive, got {self.weight}")
        if any(v not in (0, 1) for v in self.groups.values()):
            raise CohortError("group indicators must be binary")

    def with_weight(self, weight: float) -> "LabeledInstance":
        return LabeledInstance(self.participant_id, self.date, self.input_vector,
                               self.label, self.groups, float(weight))


@dataclass(frozen=True, eq=False)
class Cohort:
    """
    Participants, their day records and assessments, plus derived instances.

    Invariants checked on construction: every instance belongs to a known
    participant and has at least one earlier assessment for that participant.
    """
    profiles: Mapping[str, ProtectedProfile]
    days: Mapping[Tuple[str, date], DayRecord]
    assessments: Mapping[str, Tuple[PainAssessment, ...]]
    instances: Tuple[LabeledInstance, ...] = ()
    plan: Optional[EncodingPlan] = None
    vector_columns: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "profiles", MappingProxyType(dict(self.profiles)))
        object.__setattr__(self, "days", MappingProxyType(dict(self.days)))
        object.__setattr__(
            self, "assessments",
            MappingProxyType({pid: tuple(sorted(items, key=lambda a: a.date))
                              for pid, items in self.assessments.items()})
        )
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "vector_columns", tuple(self.vector_columns))

        for inst in self.instances:
            if inst.participant_id not in self.profiles:
                raise CohortError(f"Instance for unknown participant {inst.participant_id}")
            prior = [a for a in self.assessments.get(inst.participant_id, ()) if a.date < inst.date]
            if not prior:
                raise CohortError(
                    f"Instance {inst.participant_id} {inst.date} has no prior pain assessment"
                )

    @property
    def participant_ids(self) -> List[str]:
        return sorted(self.profiles)

    def __len__(self) -> int:
        return len(self.instances)

    def subset(self, participant_ids: Sequence[str]) -> "Cohort":
        """Restrict to the given participants (instances included)."""
        keep = set(participant_ids)
        return Cohort(
            profiles={pid: p for pid, p in self.profiles.items() if pid in keep},
            days={key: d for key, d in self.days.items() if key[0] in keep},
            assessments={pid: a for pid, a in self.assessments.items() if pid in keep},
            instances=tuple(i for i in self.instances if i.participant_id in keep),
            plan=self.plan,
            vector_columns=self.vector_columns,
        )

    def with_instances(self, instances: Sequence[LabeledInstance], plan: EncodingPlan,
                       vector_columns: Sequence[str] = ()) -> "Cohort":
        return Cohort(self.profiles, self.days, self.assessments, tuple(instances), plan,
                      tuple(vector_columns))

    def with_weights(self, weights: Sequence[float]) -> "Cohort":
        if len(weights) != len(self.instances):
            raise CohortError(f"{len(weights)} weights for {len(self.instances)} instances")
        reweighed = tuple(inst.with_weight(w) for inst, w in zip(self.instances, weights))
        return Cohort(self.profiles, self.days, self.assessments, reweighed, self.plan,
                      self.vector_columns)

    def matrix(self) -> np.ndarray:
        if not self.instances:
            return np.zeros((0, 0))
        return np.vstack([inst.input_vector for inst in self.instances])

    def labels(self) -> np.ndarray:
        return np.array([inst.label for inst in self.instances], dtype=int)

    def weights(self) -> np.ndarray:
        return np.array([inst.weight for inst in self.instances], dtype=float)

    def group(self, attribute: str) -> np.ndarray:
        if attribute not in settings.protected_attributes:
            raise CohortError(f"Unknown protected attribute '{attribute}'")
        return np.array([inst.groups[attribute] for inst in self.instances], dtype=int)

    def group_matrix(self, attributes: Sequence[str] = None) -> np.ndarray:
        attributes = attributes or settings.protected_attributes
        return np.column_stack([self.group(a) for a in attributes]) if self.instances \
            else np.zeros((0, len(attributes)), dtype=int)

    def __repr__(self) -> str:
        return (f"Cohort(participants={len(self.profiles)}, days={len(self.days)}, "
                f"instances={len(self.instances)})")
