"""
Experiment results containers

A ResultTable holds one row per grid cell and repetition plus aggregated
rows (mean and std over repetitions). Every row's verdicts must agree with
a recomputation from its metric values.
"""

import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.fairness.metrics import FAIR, METRICS, verdict
from src.utils.errors import ResultIntegrityError

ROW_KEYS = ("attribute", "mitigation", "model")


def _stage(mitigation: str) -> str:
    return "pre" if mitigation == "none" else "post"


def _mean_std(values: List[Optional[float]]):
    present = [v for v in values if v is not None and not (isinstance(v, float) and math.isnan(v))]
    if not present:
        return None, None
    arr = np.array(present, dtype=float)
    if np.isinf(arr).any():
        return float(arr.mean()), None
    return float(arr.mean()), float(arr.std())


def cell_row(repetition: int, attribute: str, mitigation: str, model: str,
             accuracy: Optional[float], metrics: Optional[Dict[str, Optional[float]]],
             n_train: int = 0, n_test: int = 0, error: Optional[str] = None) -> Dict:
    metrics = metrics or {m: None for m in METRICS}
    verdicts = {m: verdict(m, metrics[m]) for m in METRICS}
    return {
        "repetition": repetition, "attribute": attribute, "mitigation": mitigation, "model": model,
        "stage": _stage(mitigation), "accuracy": accuracy,
        **{m: metrics[m] for m in METRICS},
        "verdicts": verdicts,
        "fair_count": sum(v == FAIR for v in verdicts.values()),
        "n_train": n_train, "n_test": n_test, "error": error,
    }


def aggregate(cells: List[Dict]) -> List[Dict]:
    """Mean/std over repetitions per (attribute, mitigation, model); verdicts from the means."""
    groups: Dict[tuple, List[Dict]] = {}
    for row in cells:
        groups.setdefault(tuple(row[k] for k in ROW_KEYS), []).append(row)

    rows = []
    for (attribute, mitigation, model), members in groups.items():
        row = {"attribute": attribute, "mitigation": mitigation, "model": model,
               "stage": _stage(mitigation), "repetitions": len(members),
               "failed": sum(1 for r in members if r["error"])}
        for name in ("accuracy",) + METRICS:
            row[name], row[f"{name}_std"] = _mean_std([r[name] for r in members])
        row["verdicts"] = {m: verdict(m, row[m]) for m in METRICS}
        row["fair_count"] = sum(v == FAIR for v in row["verdicts"].values())
        rows.append(row)
    return rows


class ResultTable:
    """Per-cell and aggregated result rows"""

    def __init__(self, cells: List[Dict], rows: Optional[List[Dict]] = None):
        self.cells = cells
        self.rows = rows if rows is not None else aggregate(cells)

    def verify(self) -> None:
        """
        Raises:
            ResultIntegrityError: a stored verdict or fair count disagrees with its metric value
        """
        for row in self.cells + self.rows:
            recomputed = {m: verdict(m, row[m]) for m in METRICS}
            if recomputed != row["verdicts"]:
                raise ResultIntegrityError(
                    f"verdict mismatch for {[row[k] for k in ROW_KEYS]}: "
                    f"stored {row['verdicts']}, recomputed {recomputed}"
                )
            if row["fair_count"] != sum(v == FAIR for v in recomputed.values()):
                raise ResultIntegrityError(f"fair count mismatch for {[row[k] for k in ROW_KEYS]}")

    def ranking(self, attribute: str) -> List[Dict]:
        """Rows for ``attribute`` by fair-metric count, then accuracy (descending)."""
        candidates = [r for r in self.rows if r["attribute"] == attribute]
        return sorted(
            candidates,
            key=lambda r: (-r["fair_count"], -(r["accuracy"] if r["accuracy"] is not None else -1.0)),
        )

    def winners(self) -> Dict[str, Dict]:
        attributes = dict.fromkeys(r["attribute"] for r in self.rows)
        return {a: self.ranking(a)[0] for a in attributes if self.ranking(a)}

    def to_dict(self) -> Dict:
        return {"cells": self.cells, "rows": self.rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, payload: Dict) -> "ResultTable":
        return cls(payload["cells"], payload["rows"])

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        return cls.from_dict(json.loads(text))

    def to_dataframe(self) -> pd.DataFrame:
        frame = pd.DataFrame([{k: v for k, v in r.items() if k != "verdicts"} for r in self.rows])
        for metric in METRICS:
            frame[f"{metric}_verdict"] = [r["verdicts"][metric] for r in self.rows]
        return frame

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_dataframe().to_csv(path, index=False, lineterminator="\n")
        return path

    def plot_data(self) -> pd.DataFrame:
        """Long format (attribute, model, mitigation, stage, metric, mean, std) for external plotting"""
        records = []
        for row in self.rows:
            for metric in ("accuracy",) + METRICS:
                records.append({
                    "attribute": row["attribute"], "model": row["model"],
                    "mitigation": row["mitigation"], "stage": row["stage"],
                    "metric": metric, "mean": row[metric], "std": row[f"{metric}_std"],
                })
        return pd.DataFrame(records)

    def summary(self) -> str:
        """Generate formatted ranking per attribute."""
        lines = ["=" * 60, "EXPERIMENT RESULTS", "=" * 60]
        winners = self.winners()
        for attribute in winners:
            lines += ["", f"Attribute: {attribute}",
                      f"  {'model':<15}{'mitigation':<12}{'accuracy':>10}{'fair':>6}  "
                      f"{'spd':>8}{'di':>8}{'eod':>8}{'aod':>8}{'theil':>8}"]
            for row in self.ranking(attribute):
                mark = "*" if row is winners[attribute] else " "

                def fmt(value, width=8):
                    return f"{value:>{width}.3f}" if value is not None else f"{'n/a':>{width}}"

                lines.append(
                    f"{mark} {row['model']:<15}{row['mitigation']:<12}{fmt(row['accuracy'], 10)}"
                    f"{row['fair_count']:>6}  " + "".join(fmt(row[m]) for m in METRICS)
                )
        lines += ["", "* best fair-metric count, then accuracy", "=" * 60]
        return "\n".join(lines)


class ExperimentResults:
    """Result table, dataset-bias stage and the spec that produced them"""

    def __init__(self, spec, table: ResultTable, dataset_bias: pd.DataFrame):
        self.spec = spec
        self.table = table
        self.dataset_bias = dataset_bias

    def summary(self) -> str:
        return "\n".join([self.table.summary(), "", "Dataset bias (labels):",
                          self.dataset_bias.to_string(index=False)])

    def save(self, out_dir: Optional[Union[str, Path]] = None) -> Dict[str, Path]:
        out = Path(out_dir or self.spec.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "results": out / "results.json",
            "table": out / "results.csv",
            "plot_data": out / "plot_data.csv",
            "dataset_bias": out / "dataset_bias.csv",
            "spec": out / "spec.json",
        }
        paths["results"].write_text(self.table.to_json())
        self.table.to_csv(paths["table"])
        self.table.plot_data().to_csv(paths["plot_data"], index=False, lineterminator="\n")
        self.dataset_bias.to_csv(paths["dataset_bias"], index=False, lineterminator="\n")
        paths["spec"].write_text(self.spec.to_json())
        return paths
