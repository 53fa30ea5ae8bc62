"""
Disparate Impact Remover

Per feature column, each group's values are mapped toward a median
distribution by quantile alignment:

    x' = (1 - repair_level) * x + repair_level * M(q_g(x))

q_g(x) is the position of x in its group's empirical distribution (tied
values share their average position (rank - 0.5) / n_g) and M is the median
over groups of their quantile functions, evaluated on the sorted union of
every group's positions. Both maps are non-decreasing, so within-group
order is preserved.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from src.mitigation.base import BaseMitigator, aligned_group
from src.utils.errors import PainFairError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()


def _positions(values: np.ndarray):
    """Distinct sorted values and their average quantile positions."""
    ordered = np.sort(values)
    n = ordered.size
    unique, inverse = np.unique(ordered, return_inverse=True)
    raw = (np.arange(n) + 0.5) / n
    sums = np.bincount(inverse, weights=raw)
    return unique, sums / np.bincount(inverse)


@dataclass
class ColumnRepair:
    """Quantile maps of one feature column"""
    group_values: Dict[int, np.ndarray]
    group_positions: Dict[int, np.ndarray]
    grid: np.ndarray
    median: np.ndarray
    passthrough: List[int] = field(default_factory=list)

    def apply(self, column: np.ndarray, group: np.ndarray, repair_level: float) -> np.ndarray:
        repaired = column.astype(float).copy()
        if self.grid.size == 0:
            return repaired
        for g in np.unique(group):
            g = int(g)
            if g in self.passthrough or g not in self.group_values:
                continue
            mask = group == g
            q = np.interp(column[mask], self.group_values[g], self.group_positions[g])
            target = np.interp(q, self.grid, self.median)
            repaired[mask] = (1.0 - repair_level) * column[mask] + repair_level * target
        return repaired

    def to_dict(self) -> Dict:
        return {
            "groups": {
                str(g): {"values": self.group_values[g].tolist(),
                         "positions": self.group_positions[g].tolist()}
                for g in sorted(self.group_values)
            },
            "grid": self.grid.tolist(),
            "median": self.median.tolist(),
            "passthrough": sorted(self.passthrough),
        }

    @classmethod
    def from_dict(cls, payload: Dict) -> "ColumnRepair":
        groups = payload["groups"]
        return cls(
            group_values={int(g): np.array(v["values"]) for g, v in groups.items()},
            group_positions={int(g): np.array(v["positions"]) for g, v in groups.items()},
            grid=np.array(payload["grid"]),
            median=np.array(payload["median"]),
            passthrough=list(payload.get("passthrough", [])),
        )


def fit_column(column: np.ndarray, group: np.ndarray) -> ColumnRepair:
    values, positions, passthrough = {}, {}, []
    for g in np.unique(group):
        g = int(g)
        unique, pos = _positions(column[group == g])
        if unique.size < 2:
            passthrough.append(g)
            continue
        values[g], positions[g] = unique, pos

    if not values:
        return ColumnRepair(values, positions, np.zeros(0), np.zeros(0), passthrough)
    grid = np.unique(np.concatenate(list(positions.values())))
    quantiles = np.vstack([np.interp(grid, positions[g], values[g]) for g in sorted(values)])
    return ColumnRepair(values, positions, grid, np.median(quantiles, axis=0), passthrough)


@dataclass
class RepairPlan:
    """Fitted per-column repair maps and the repair level"""
    repair_level: float
    columns: List[ColumnRepair] = field(default_factory=list)

    def transform(self, matrix: np.ndarray, group) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        group = aligned_group(group, matrix.shape[0], "rows")
        if matrix.ndim != 2 or matrix.shape[1] != len(self.columns):
            raise PainFairError(f"repair plan has {len(self.columns)} columns, matrix shape {matrix.shape}")
        if self.repair_level == 0:
            return matrix.copy()
        return np.column_stack([
            repair.apply(matrix[:, j], group, self.repair_level)
            for j, repair in enumerate(self.columns)
        ])

    def to_dict(self) -> Dict:
        return {"repair_level": self.repair_level, "columns": [c.to_dict() for c in self.columns]}

    @classmethod
    def from_dict(cls, payload: Dict) -> "RepairPlan":
        return cls(float(payload["repair_level"]), [ColumnRepair.from_dict(c) for c in payload["columns"]])

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), sort_keys=True))
        return path


def _check_level(repair_level: float):
    if not 0.0 <= repair_level <= 1.0:
        raise PainFairError(f"repair_level must lie in [0, 1], got {repair_level}")


def fit_repair(matrix, group, repair_level: float = 1.0) -> RepairPlan:
    _check_level(repair_level)
    matrix = np.asarray(matrix, dtype=float)
    group = aligned_group(group, matrix.shape[0], "rows")
    plan = RepairPlan(repair_level, [fit_column(matrix[:, j], group) for j in range(matrix.shape[1])])
    passthrough = sum(1 for c in plan.columns if c.passthrough)
    if passthrough:
        logger.warning(f"Disparate impact repair: {passthrough} columns have a single-valued group left unrepaired")
    return plan


def dir_repair(matrix, group, repair_level: float = 1.0) -> np.ndarray:
    """Repair ``matrix`` against its own group distributions; labels are untouched."""
    return fit_repair(matrix, group, repair_level).transform(matrix, group)


class DisparateImpactRemover(BaseMitigator):
    """Pre-processing mitigator: fit on training features, transform any split"""

    stage = "pre"

    def __init__(self, repair_level: float = 1.0, attribute: str = "gender"):
        super().__init__(name="DisparateImpactRemover", repair_level=repair_level, attribute=attribute)
        self.plan: Optional[RepairPlan] = None

    def _validate_parameters(self) -> None:
        _check_level(self.parameters["repair_level"])
        self._check_attribute()

    def fit(self, matrix, group) -> "DisparateImpactRemover":
        self.plan = fit_repair(matrix, group, self.parameters["repair_level"])
        self._mark_fitted()
        return self

    def transform(self, matrix, group) -> np.ndarray:
        self._require_fitted()
        return self.plan.transform(matrix, group)

    def fit_transform(self, matrix, group) -> np.ndarray:
        return self.fit(matrix, group).transform(matrix, group)
