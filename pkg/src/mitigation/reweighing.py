"""
Reweighing

Instance weights w(g, l) = P(g) P(l) / P(g, l) make the protected attribute
and the label independent in the weighted data, so the weighted statistical
parity difference of the labels is 0 and the total weight stays n.
"""

import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from src.cohort.models import Cohort
from src.mitigation.base import BaseMitigator, aligned_group
from src.utils.errors import DegenerateGroupError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()

CELLS = tuple(product((0, 1), (0, 1)))  # (group, label)


@dataclass
class ReweighingTable:
    """Weight and count per (group, label) cell; empty cells weigh 1"""
    weights: Dict[Tuple[int, int], float]
    counts: Dict[Tuple[int, int], int]
    empty_cells: List[Tuple[int, int]] = field(default_factory=list)

    def weight_for(self, group: int, label: int) -> float:
        return self.weights[(int(group), int(label))]

    def instance_weights(self, labels, group) -> np.ndarray:
        labels = np.asarray(labels, dtype=int)
        group = np.asarray(group, dtype=int)
        return np.array([self.weights[(g, l)] for g, l in zip(group, labels)], dtype=float)

    def to_dict(self) -> Dict:
        return {
            "cells": [
                {"group": g, "label": l, "weight": self.weights[(g, l)], "count": self.counts[(g, l)]}
                for g, l in CELLS
            ],
            "empty_cells": [list(cell) for cell in self.empty_cells],
        }

    @classmethod
    def from_dict(cls, payload: Dict) -> "ReweighingTable":
        weights = {(c["group"], c["label"]): float(c["weight"]) for c in payload["cells"]}
        counts = {(c["group"], c["label"]): int(c["count"]) for c in payload["cells"]}
        return cls(weights, counts, [tuple(cell) for cell in payload.get("empty_cells", [])])

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        return path


def reweigh(labels, group) -> Tuple[ReweighingTable, np.ndarray]:
    """
    Reweighing table and per-instance weights

    Args:
        labels: Binary labels
        group: Privileged indicator (1 = privileged)

    Returns:
        (table, weights aligned with ``labels``)

    Raises:
        DegenerateGroupError: one side of the attribute is absent
    """
    labels = np.asarray(labels, dtype=int).ravel()
    group = aligned_group(group, labels.size, "labels")
    if not (np.any(group == 1) and np.any(group == 0)):
        raise DegenerateGroupError("degenerate group: reweighing needs both privileged and unprivileged instances")

    n = labels.size
    weights, counts, empty = {}, {}, []
    for g, l in CELLS:
        n_cell = int(np.sum((group == g) & (labels == l)))
        counts[(g, l)] = n_cell
        if n_cell == 0:
            weights[(g, l)] = 1.0
            empty.append((g, l))
            logger.warning(f"Reweighing cell (group={g}, label={l}) is empty; weight 1, parity not guaranteed")
            continue
        n_group = int(np.sum(group == g))
        n_label = int(np.sum(labels == l))
        weights[(g, l)] = (n_group * n_label) / (n * n_cell)

    table = ReweighingTable(weights, counts, empty)
    return table, table.instance_weights(labels, group)


class Reweighing(BaseMitigator):
    """Pre-processing mitigator assigning reweighing instance weights to a cohort"""

    stage = "pre"

    def __init__(self, attribute: str = "gender"):
        super().__init__(name="Reweighing", attribute=attribute)
        self.table: Optional[ReweighingTable] = None

    def _validate_parameters(self) -> None:
        self._check_attribute()

    def fit(self, cohort: Cohort) -> "Reweighing":
        self.table, _ = reweigh(cohort.labels(), cohort.group(self.parameters["attribute"]))
        self._mark_fitted()
        return self

    def transform(self, cohort: Cohort) -> Cohort:
        self._require_fitted()
        weights = self.table.instance_weights(cohort.labels(), cohort.group(self.parameters["attribute"]))
        return cohort.with_weights(weights)

    def fit_transform(self, cohort: Cohort) -> Cohort:
        return self.fit(cohort).transform(cohort)
