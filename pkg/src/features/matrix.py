"""Feature matrix assembly over a cohort's labelled days"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.cohort.instances import labelled_days
from src.cohort.models import Cohort, DayRecord, EncodingPlan, LabeledInstance
from src.cohort.preprocessing import demographic_values, impute
from src.config.settings import settings
from src.features.deviance import FeatureVector, deviance, flatten_block
from src.features.spectral import extract_spectral
from src.features.statistical import extract_statistical
from src.features.temporal import extract_temporal
from src.utils.errors import ImputationError, PainFairError, SeriesTooShortError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()

EXTRACTORS = {
    "statistical": lambda series: extract_statistical(series),
    "temporal": lambda series: extract_temporal(series, settings.sample_rate_hz),
    "spectral": lambda series: extract_spectral(series, settings.sample_rate_hz),
}


def extract_day_features(record: DayRecord, plan: EncodingPlan) -> FeatureVector:
    """Imputed channels -> namespaced catalog features, domain-major then channel."""
    channels = {name: impute(record.channel(name), plan.imputation) for name in plan.channels}
    blocks = []
    for domain in plan.domains:
        for channel in plan.channels:
            names, values = flatten_block(
                domain, channel, EXTRACTORS[domain](channels[channel]), plan.expand_multivalued
            )
            blocks.append(FeatureVector(names, values))
    return FeatureVector.concat(blocks)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """One row per labelled instance, namespaced columns in catalog order"""
    values: np.ndarray
    columns: Tuple[str, ...]
    keys: Tuple[Tuple[str, date], ...]
    labels: np.ndarray
    groups: Dict[str, np.ndarray]
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.weights is None:
            object.__setattr__(self, "weights", np.ones(len(self.keys)))
        if self.values.shape != (len(self.keys), len(self.columns)):
            raise PainFairError(
                f"matrix shape {self.values.shape} does not match "
                f"{len(self.keys)} rows x {len(self.columns)} columns"
            )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def __len__(self) -> int:
        return len(self.keys)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=list(self.columns))
        frame.insert(0, "participant_id", [pid for pid, _ in self.keys])
        frame.insert(1, "date", [d.isoformat() for _, d in self.keys])
        frame.insert(2, "label", self.labels)
        return frame

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator="\n")
        logger.info(f"Wrote {self.shape[0]} x {self.shape[1]} feature matrix to {path}")
        return path

    def to_instances(self) -> List[LabeledInstance]:
        attributes = list(self.groups)
        return [
            LabeledInstance(
                participant_id=pid,
                date=day,
                input_vector=self.values[i],
                label=int(self.labels[i]),
                groups={a: int(self.groups[a][i]) for a in attributes},
                weight=float(self.weights[i]),
            )
            for i, (pid, day) in enumerate(self.keys)
        ]


def _row(cohort: Cohort, plan: EncodingPlan, pid: str, day: date,
         cache: Dict) -> Tuple[Optional[np.ndarray], Optional[Tuple[str, ...]], Optional[str]]:
    """(values, columns, drop_reason) for one labelled day."""

    def features(key) -> FeatureVector:
        if key not in cache:
            cache[key] = extract_day_features(cohort.days[key], plan)
        return cache[key]

    try:
        current = features((pid, day))
        if plan.variants:
            previous_key = (pid, day - timedelta(days=1))
            if previous_key not in cohort.days:
                return None, None, "no day record on the previous day"
            previous = features(previous_key)
            parts = [deviance(current, previous, variant) for variant in plan.variants]
            columns = tuple(c for part in parts for c in part.column_names())
            values = np.concatenate([part.values for part in parts])
        else:
            columns, values = current.names, current.values
    except (ImputationError, SeriesTooShortError) as e:
        return None, None, str(e)

    if plan.include_demographics:
        columns = tuple(f"demographic.{slot}" for slot in plan.demographic_slots) + columns
        values = np.concatenate([demographic_values(cohort.profiles[pid], plan.demographic_slots), values])
    return values, columns, None


def build_feature_matrix(cohort: Cohort, plan: EncodingPlan, workers: int = 1) -> FeatureMatrix:
    """
    Assemble the feature matrix for every labelled day of ``cohort``

    Args:
        cohort: Cohort with day records and assessments
        plan: Feature-mode encoding plan (domains, channels, variants)
        workers: Thread count for per-instance extraction; row order is unaffected

    Returns:
        FeatureMatrix in participant/date order

    Raises:
        PainFairError: no instance survives ("empty matrix")
    """
    rows = labelled_days(cohort)
    cache: Dict = {}

    def compute(item):
        pid, day, _ = item
        return _row(cohort, plan, pid, day, cache)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(compute, rows))
    else:
        results = [compute(item) for item in rows]

    kept_values, keys, labels, columns = [], [], [], None
    for (pid, day, label), (values, cols, reason) in zip(rows, results):
        if reason is not None:
            logger.info(f"Dropped instance {pid} {day}: {reason}")
            continue
        columns = columns or cols
        kept_values.append(values)
        keys.append((pid, day))
        labels.append(label)

    if not keys:
        raise PainFairError("empty matrix: no labelled instance has the data this plan requires")

    groups = {
        attribute: np.array([cohort.profiles[pid].privileged[attribute] for pid, _ in keys], dtype=int)
        for attribute in settings.protected_attributes
    }
    matrix = FeatureMatrix(
        values=np.vstack(kept_values),
        columns=columns,
        keys=tuple(keys),
        labels=np.array(labels, dtype=int),
        groups=groups,
    )
    logger.info(
        f"Built feature matrix {matrix.shape[0]} x {matrix.shape[1]} "
        f"({len(rows) - len(keys)} instances dropped)"
    )
    return matrix
