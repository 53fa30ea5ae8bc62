"""
Synthetic Cohort Generator

Seeded stand-in for a restricted wearable cohort. Each participant gets a
protected profile, a serial VAS history starting early in ``year`` and two
minute-level days per labelled assessment (the assessment day and the day
before it). VAS scores stay in [0, 10]; a participant at 0 cannot recover
further.

Recovery between consecutive assessments is drawn with probability

    p = base_recovery_rate * prod_k (1 - strength_k * (1 - privileged_k))

so a strength of 0 makes labels independent of attribute k and a strength
of 1 removes recovery entirely for its unprivileged group. Heart-rate and
step waveforms depend only on the label, never on group membership.
"""

from datetime import date, timedelta
from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.cohort.instances import build_instances
from src.cohort.models import Cohort, DayRecord, EncodingPlan, PainAssessment, ProtectedProfile
from src.config.settings import settings
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()

UNPRIVILEGED_RACES = ("White", "Black or African American", "More than one race")


class SynthConfig(BaseModel):
    """Generator configuration"""
    model_config = ConfigDict(frozen=True)

    n_participants: int = Field(100, ge=2)
    bias: Dict[str, float] = Field(default_factory=dict)
    seed: int = 0
    base_recovery_rate: float = Field(0.6, gt=0.0, le=1.0)
    privileged_share: float = Field(0.5, gt=0.0, lt=1.0)
    min_assessments: int = Field(3, ge=2)
    max_assessments: int = Field(6, ge=2)
    missing_rate: float = Field(0.02, ge=0.0, le=0.05)
    year: int = 2022

    @field_validator("bias")
    @classmethod
    def _check_bias(cls, value):
        for attribute, strength in value.items():
            if attribute not in settings.protected_attributes:
                raise ValueError(f"Unknown protected attribute '{attribute}'")
            if not 0.0 <= strength <= 1.0:
                raise ValueError(f"bias strength for {attribute} must lie in [0, 1], got {strength}")
        return value

    def strength(self, attribute: str) -> float:
        return float(self.bias.get(attribute, 0.0))


def _diurnal(minutes: np.ndarray) -> np.ndarray:
    """Activity level in [0, 1], low overnight, peaking mid-afternoon."""
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * (minutes - 180) / settings.minutes_per_day))


def _profile_flags(rng: np.random.Generator, config: SynthConfig) -> Dict[str, np.ndarray]:
    """Exactly round(share * n) privileged participants per attribute, independently permuted."""
    n = config.n_participants
    n_privileged = int(round(config.privileged_share * n))
    flags = {}
    for attribute in settings.protected_attributes:
        column = np.zeros(n, dtype=int)
        column[:n_privileged] = 1
        flags[attribute] = rng.permutation(column)
    return flags


def _make_profile(pid: str, flags: Dict[str, int], rng: np.random.Generator) -> ProtectedProfile:
    cutoff = settings.elderly_age_cutoff
    return ProtectedProfile(
        participant_id=pid,
        gender="Male" if flags["gender"] else "Female",
        race="Asian" if flags["race"] else str(rng.choice(UNPRIVILEGED_RACES)),
        ethnicity="Not Hispanic or Latino" if flags["ethnicity"] else "Hispanic or Latino",
        age=int(rng.integers(25, cutoff)) if flags["age"] else int(rng.integers(cutoff, 90)),
        dementia="absent" if flags["dementia"] else "present",
    )


def _make_day(pid: str, day: date, label: Optional[int], rng: np.random.Generator,
              missing_rate: float) -> DayRecord:
    """
    Diurnal heart rate (bpm, 0.1 resolution) and Poisson step counts.

    ``label`` None is a neutral day; 1 lowers resting heart rate and raises
    activity, 0 does the opposite.
    """
    minutes = np.arange(settings.minutes_per_day)
    activity = _diurnal(minutes)
    effect = 0.0 if label is None else (1.0 if label == 1 else -1.0)

    resting = 68.0 - 4.0 * effect + rng.normal(0.0, 1.5)
    hr = resting + 18.0 * activity + rng.normal(0.0, 3.0, size=minutes.size)
    hr = np.round(np.clip(hr, 35.0, 200.0), 1)

    step_rate = activity * (5.0 + 2.0 * effect) + 0.05
    steps = rng.poisson(step_rate).astype(float)

    hr[rng.random(minutes.size) < missing_rate] = np.nan
    steps[rng.random(minutes.size) < missing_rate] = np.nan
    return DayRecord(pid, day, hr, steps)


def synthesize_cohort(config: SynthConfig, plan: Optional[EncodingPlan] = None) -> Cohort:
    """
    Generate a cohort deterministically from ``config.seed``

    Args:
        config: Generator configuration
        plan: Encoding plan for the derived instances (defaults to raw mode)

    Returns:
        Cohort with instances built under ``plan``
    """
    if config.max_assessments < config.min_assessments:
        raise ValueError("max_assessments must be >= min_assessments")

    rng = np.random.default_rng(config.seed)
    flags = _profile_flags(rng, config)
    width = len(str(config.n_participants))

    profiles, days, assessments = {}, {}, {}
    for i in range(config.n_participants):
        pid = f"P{i + 1:0{width}d}"
        member = {attribute: int(flags[attribute][i]) for attribute in settings.protected_attributes}
        profile = _make_profile(pid, member, rng)
        profiles[pid] = profile

        recovery_p = config.base_recovery_rate
        for attribute in settings.protected_attributes:
            recovery_p *= 1.0 - config.strength(attribute) * (1 - member[attribute])

        n_assessments = int(rng.integers(config.min_assessments, config.max_assessments + 1))
        current = date(config.year, 1, 1) + timedelta(days=int(rng.integers(1, 60)))
        vas = int(rng.integers(6, 11))
        history = [PainAssessment(pid, current, vas)]
        for _ in range(n_assessments - 1):
            current = current + timedelta(days=int(rng.integers(4, 31)))
            recovered = int(vas > 0 and rng.random() < recovery_p)
            vas = vas - 1 if recovered else min(10, vas + int(rng.integers(0, 2)))
            history.append(PainAssessment(pid, current, vas))

            days[(pid, current - timedelta(days=1))] = _make_day(
                pid, current - timedelta(days=1), None, rng, config.missing_rate
            )
            days[(pid, current)] = _make_day(pid, current, recovered, rng, config.missing_rate)
        assessments[pid] = history

    cohort = build_instances(Cohort(profiles, days, assessments), plan or EncodingPlan())
    logger.info(
        f"Synthesized {cohort!r} (seed={config.seed}, bias={dict(sorted(config.bias.items()))})"
    )
    return cohort
