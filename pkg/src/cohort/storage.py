"""DuckDB-backed reading of CSV cohort bundles, plus bundle/JSON writers"""
import json
from pathlib import Path
from typing import Dict, List, Optional, Union

import duckdb
import numpy as np
import pandas as pd
from dateutil.parser import isoparse

from src.cohort.models import Cohort, DayRecord, EncodingPlan, PainAssessment, ProtectedProfile
from src.config.settings import settings, COHORT_SCHEMA_VERSION
from src.utils.errors import CohortError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()

# Column name -> duckdb type used for TRY_CAST. VARCHAR columns are trimmed only.
TABLE_SCHEMAS: Dict[str, Dict[str, str]] = {
    "participants": {
        "participant_id": "VARCHAR",
        "gender": "VARCHAR",
        "race": "VARCHAR",
        "ethnicity": "VARCHAR",
        "age": "DOUBLE",
        "dementia": "VARCHAR",
    },
    "days": {
        "participant_id": "VARCHAR",
        "date": "VARCHAR",
        "minute_index": "DOUBLE",
        "heart_rate": "DOUBLE",
        "steps": "DOUBLE",
    },
    "assessments": {
        "participant_id": "VARCHAR",
        "date": "VARCHAR",
        "vas_score": "DOUBLE",
    },
}

RAW_SUFFIX = "__raw"


def _sql_literal(value: str) -> str:
    return "'" + str(value).replace("'", "''") + "'"


class BundleStorage:
    """
    Read the three CSV files of a cohort bundle through an in-memory DuckDB.

    Every column is read as text; numeric columns come back twice, as the
    TRY_CAST value and as the trimmed raw text (``<col>__raw``), so the
    validator can tell a blank cell (missing) from a malformed one.
    """

    def __init__(self, bundle_path: Union[str, Path]):
        self.bundle_path = Path(bundle_path)
        self.conn = None

    def connect(self) -> duckdb.DuckDBPyConnection:
        if self.conn is None:
            if not self.bundle_path.is_dir():
                raise FileNotFoundError(f"Cohort bundle not found: {self.bundle_path}")
            logger.info(f"Opening cohort bundle at {self.bundle_path}")
            self.conn = duckdb.connect(":memory:")
            self._register_views()
        return self.conn

    def _register_views(self):
        for table in TABLE_SCHEMAS:
            csv_path = self.bundle_path / f"{table}.csv"
            if not csv_path.is_file():
                raise FileNotFoundError(f"Bundle is missing {csv_path.name}")
            self.conn.execute(
                f"CREATE OR REPLACE VIEW {table}_raw AS "
                f"SELECT * FROM read_csv({_sql_literal(csv_path)}, header=true, all_varchar=true)"
            )

    def get_columns(self, table: str) -> List[str]:
        """Column names present in ``<table>.csv``"""
        description = self.conn.execute(f"SELECT * FROM {table}_raw LIMIT 0").description
        return [col[0].strip() for col in description]

    def query_table(self, table: str) -> pd.DataFrame:
        """
        Typed view of one bundle table.

        Assumes the required columns exist (check with ``get_columns`` first).
        The ``row_number`` column is the 1-based data row in the file.
        """
        selects = ["row_number() OVER () AS row_number"]
        for column, sql_type in TABLE_SCHEMAS[table].items():
            raw = f"NULLIF(trim(\"{column}\"), '')"
            if sql_type == "VARCHAR":
                selects.append(f"{raw} AS \"{column}\"")
            else:
                selects.append(f"TRY_CAST({raw} AS {sql_type}) AS \"{column}\"")
                selects.append(f"{raw} AS \"{column}{RAW_SUFFIX}\"")

        df = self.conn.execute(f"SELECT {', '.join(selects)} FROM {table}_raw").fetchdf()
        logger.info(f"Read {len(df)} rows from {table}.csv")
        return df

    def get_bundle_summary(self) -> pd.DataFrame:
        """Row counts per bundle table"""
        rows = []
        for table in TABLE_SCHEMAS:
            count = self.conn.execute(f"SELECT COUNT(*) FROM {table}_raw").fetchone()[0]
            rows.append({"table": table, "row_count": count})
        return pd.DataFrame(rows)

    def close(self):
        if self.conn:
            self.conn.close()
            self.conn = None

    def __enter__(self):
        self.connect()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


def write_bundle(cohort: Cohort, bundle_path: Union[str, Path]) -> Path:
    """
    Write ``participants.csv``, ``days.csv`` and ``assessments.csv``.

    Missing minutes become blank cells. Output bytes depend only on the cohort.
    """
    bundle_path = Path(bundle_path)
    bundle_path.mkdir(parents=True, exist_ok=True)

    participants = pd.DataFrame([
        {
            "participant_id": p.participant_id,
            "gender": p.gender,
            "race": p.race,
            "ethnicity": p.ethnicity,
            "age": int(p.age),
            "dementia": p.dementia,
        }
        for _, p in sorted(cohort.profiles.items())
    ], columns=list(TABLE_SCHEMAS["participants"]))
    participants.to_csv(bundle_path / "participants.csv", index=False, lineterminator="\n")

    minutes = np.arange(settings.minutes_per_day)
    frames = []
    for (pid, day), record in sorted(cohort.days.items()):
        frames.append(pd.DataFrame({
            "participant_id": pid,
            "date": day.isoformat(),
            "minute_index": minutes,
            "heart_rate": record.heart_rate,
            "steps": pd.Series(record.steps).astype("Int64"),
        }))
    days = pd.concat(frames, ignore_index=True) if frames else \
        pd.DataFrame(columns=list(TABLE_SCHEMAS["days"]))
    days.to_csv(bundle_path / "days.csv", index=False, lineterminator="\n")

    assessments = pd.DataFrame([
        {"participant_id": a.participant_id, "date": a.date.isoformat(), "vas_score": int(a.vas_score)}
        for pid in sorted(cohort.assessments)
        for a in cohort.assessments[pid]
    ], columns=list(TABLE_SCHEMAS["assessments"]))
    assessments.to_csv(bundle_path / "assessments.csv", index=False, lineterminator="\n")

    logger.info(
        f"Wrote bundle to {bundle_path}: {len(participants)} participants, "
        f"{len(cohort.days)} days, {len(assessments)} assessments"
    )
    return bundle_path


def _nan_to_none(values: np.ndarray) -> List[Optional[float]]:
    return [None if np.isnan(v) else float(v) for v in values]


def cohort_to_dict(cohort: Cohort) -> Dict:
    return {
        "schema_version": COHORT_SCHEMA_VERSION,
        "profiles": [
            {
                "participant_id": p.participant_id,
                "gender": p.gender,
                "race": p.race,
                "ethnicity": p.ethnicity,
                "age": int(p.age),
                "dementia": p.dementia,
            }
            for _, p in sorted(cohort.profiles.items())
        ],
        "days": [
            {
                "participant_id": pid,
                "date": day.isoformat(),
                "heart_rate": _nan_to_none(record.heart_rate),
                "steps": _nan_to_none(record.steps),
            }
            for (pid, day), record in sorted(cohort.days.items())
        ],
        "assessments": [
            {"participant_id": a.participant_id, "date": a.date.isoformat(), "vas_score": int(a.vas_score)}
            for pid in sorted(cohort.assessments)
            for a in cohort.assessments[pid]
        ],
        "plan": cohort.plan.model_dump(mode="json") if cohort.plan is not None else None,
    }


def cohort_from_dict(payload: Dict) -> Cohort:
    """Rebuild a cohort; instances are recomputed from the stored plan."""
    from src.cohort.instances import build_instances

    version = payload.get("schema_version")
    if version != COHORT_SCHEMA_VERSION:
        raise CohortError(f"Unsupported cohort schema version {version!r} (expected {COHORT_SCHEMA_VERSION})")

    profiles = {p["participant_id"]: ProtectedProfile(**p) for p in payload["profiles"]}
    days = {}
    for item in payload["days"]:
        day = isoparse(item["date"]).date()
        days[(item["participant_id"], day)] = DayRecord(
            participant_id=item["participant_id"],
            date=day,
            heart_rate=np.array([np.nan if v is None else v for v in item["heart_rate"]], dtype=float),
            steps=np.array([np.nan if v is None else v for v in item["steps"]], dtype=float),
        )
    assessments: Dict[str, List[PainAssessment]] = {}
    for item in payload["assessments"]:
        assessments.setdefault(item["participant_id"], []).append(
            PainAssessment(item["participant_id"], isoparse(item["date"]).date(), int(item["vas_score"]))
        )

    cohort = Cohort(profiles, days, assessments)
    if payload.get("plan") is not None:
        cohort = build_instances(cohort, EncodingPlan(**payload["plan"]))
    return cohort


def save_cohort(cohort: Cohort, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(cohort_to_dict(cohort), sort_keys=True))
    logger.info(f"Saved {cohort!r} to {path}")
    return path


def load_cohort(path: Union[str, Path]) -> Cohort:
    path = Path(path)
    with path.open() as handle:
        payload = json.load(handle)
    cohort = cohort_from_dict(payload)
    logger.info(f"Loaded {cohort!r} from {path}")
    return cohort
