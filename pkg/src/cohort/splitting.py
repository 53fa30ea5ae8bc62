"""Participant-level train/test partitioning"""
from typing import Tuple

import numpy as np

from src.cohort.models import Cohort
from src.utils.errors import SplitError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()


def split(cohort: Cohort, ratio: float, seed: int) -> Tuple[Cohort, Cohort]:
    """
    Randomly partition participants into train and test cohorts.

    All days and instances of a participant land on the same side.
    The train side gets round(ratio * n) participants.

    Raises:
        SplitError: ratio outside (0, 1) or either side would be empty
    """
    if not 0.0 < ratio < 1.0:
        raise SplitError(f"split ratio must lie strictly between 0 and 1, got {ratio}")

    participants = cohort.participant_ids
    n_train = int(round(ratio * len(participants)))
    if n_train == 0 or n_train == len(participants):
        raise SplitError(
            f"ratio {ratio} on {len(participants)} participants leaves an empty "
            f"{'train' if n_train == 0 else 'test'} side"
        )

    order = np.random.default_rng(seed).permutation(len(participants))
    train_ids = sorted(participants[i] for i in order[:n_train])
    test_ids = sorted(participants[i] for i in order[n_train:])

    train, test = cohort.subset(train_ids), cohort.subset(test_ids)
    logger.info(
        f"Split {len(participants)} participants (seed={seed}): "
        f"{len(train_ids)} train / {len(test_ids)} test, "
        f"{len(train)} / {len(test)} instances"
    )
    return train, test
