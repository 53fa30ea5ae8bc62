"""
Instance Derivation

Turns a cohort's assessments into labelled participant-days and encodes
them under an EncodingPlan.
"""

from datetime import date
from typing import List, Tuple

from src.cohort.models import Cohort, EncodingPlan, LabeledInstance
from src.cohort.preprocessing import derive_labels, encode_raw_vector, raw_vector_columns
from src.config.settings import settings
from src.utils.errors import ImputationError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()


def labelled_days(cohort: Cohort) -> List[Tuple[str, date, int]]:
    """
    (participant_id, date, label) for every derivable label whose day record exists.

    Labels without a day record on the labelled date are dropped and logged.
    Ordered by participant then date.
    """
    rows = []
    for pid in cohort.participant_ids:
        for day, label in derive_labels(cohort.assessments.get(pid, ())):
            if (pid, day) not in cohort.days:
                logger.info(f"Dropped instance {pid} {day}: no day record on the labelled date")
                continue
            rows.append((pid, day, label))
    return rows


def build_instances(cohort: Cohort, plan: EncodingPlan) -> Cohort:
    """
    Derive LabeledInstances under ``plan`` and return the cohort carrying them.

    raw mode encodes each labelled day directly; features mode delegates to
    the feature-matrix builder (which may drop instances lacking a prior day).
    """
    if plan.mode == "features":
        from src.features.matrix import build_feature_matrix

        matrix = build_feature_matrix(cohort, plan)
        return cohort.with_instances(matrix.to_instances(), plan, matrix.columns)

    instances = []
    for pid, day, label in labelled_days(cohort):
        profile = cohort.profiles[pid]
        try:
            vector = encode_raw_vector(cohort.days[(pid, day)], profile, plan)
        except ImputationError as e:
            logger.warning(f"Dropped instance {pid} {day}: {e}")
            continue
        instances.append(LabeledInstance(
            participant_id=pid,
            date=day,
            input_vector=vector,
            label=label,
            groups=profile.privileged,
        ))

    logger.info(f"Built {len(instances)} raw instances of length {plan.raw_vector_length()}")
    return cohort.with_instances(instances, plan, raw_vector_columns(plan, settings.minutes_per_day))
