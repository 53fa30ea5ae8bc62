"""Row validation for cohort bundle tables"""
from datetime import date
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from dateutil.parser import isoparse

from src.cohort.storage import TABLE_SCHEMAS, RAW_SUFFIX
from src.config.settings import settings, VAS_MIN, VAS_MAX
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()


def parse_iso_date(value) -> Optional[date]:
    """ISO-8601 text -> date, or None when unparseable."""
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return None
    try:
        return isoparse(str(value).strip()).date()
    except (ValueError, OverflowError):
        return None


def parse_date_column(values: pd.Series) -> pd.Series:
    """Parse a text column once per distinct value."""
    lookup = {value: parse_iso_date(value) for value in values.dropna().unique()}
    return values.map(lookup)


def _flag(reasons: pd.Series, mask, reason: str) -> pd.Series:
    """Record ``reason`` for rows matching ``mask`` that have no reason yet."""
    mask = pd.Series(mask, index=reasons.index).fillna(False).astype(bool)
    return reasons.mask(mask & reasons.isna(), reason)


class CohortValidator:
    """Validate bundle table schema and per-row quality"""

    def __init__(self):
        self.required_columns = {table: list(columns) for table, columns in TABLE_SCHEMAS.items()}

    def validate_schema(self, columns: List[str], table: str) -> Tuple[bool, List[str]]:
        """
        Check that a table carries its required columns

        Args:
            columns: Column names found in the file
            table: participants, days or assessments

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        errors = []
        if table not in self.required_columns:
            errors.append(f"Unknown bundle table '{table}'")
            return False, errors

        missing_cols = [c for c in self.required_columns[table] if c not in columns]
        if missing_cols:
            errors.append(f"{table}.csv missing required columns: {missing_cols}")

        is_valid = len(errors) == 0
        if is_valid:
            logger.info(f"Schema validation passed for {table}.csv")
        else:
            logger.error(f"Schema validation failed: {errors}")
        return is_valid, errors

    def row_reasons(self, df: pd.DataFrame, table: str) -> pd.Series:
        """
        Rejection reason per row (NaN for rows that pass).

        Only the first failing check is reported for a row.
        """
        reasons = pd.Series(np.nan, index=df.index, dtype=object)
        if df.empty:
            return reasons

        reasons = _flag(reasons, df["participant_id"].isna(), "missing participant_id")

        if table == "participants":
            for column in ("gender", "race", "ethnicity", "dementia"):
                reasons = _flag(reasons, df[column].isna(), f"missing {column}")
            reasons = _flag(reasons, df["age" + RAW_SUFFIX].isna(), "missing age")
            reasons = _flag(reasons, df["age"].isna(), "malformed age")
            reasons = _flag(reasons, (df["age"] < 0) | (df["age"] != np.round(df["age"])), "invalid age")
            reasons = _flag(reasons, df.duplicated(subset=["participant_id"]), "duplicate participant")
            return reasons

        dates = parse_date_column(df["date"])
        reasons = _flag(reasons, dates.isna(), "malformed date")

        if table == "days":
            minute = df["minute_index"]
            reasons = _flag(reasons, minute.isna(), "malformed minute_index")
            reasons = _flag(
                reasons,
                (minute < 0) | (minute >= settings.minutes_per_day) | (minute != np.round(minute)),
                "minute_index out of range",
            )
            for column in ("heart_rate", "steps"):
                malformed = df[column].isna() & df[column + RAW_SUFFIX].notna()
                reasons = _flag(reasons, malformed | ~np.isfinite(df[column].fillna(0.0)), f"malformed {column}")
                reasons = _flag(reasons, df[column] < 0, f"negative {column}")
            reasons = _flag(reasons, df["steps"].notna() & (df["steps"] != np.round(df["steps"])), "non-integer steps")
            keys = pd.DataFrame({"pid": df["participant_id"], "date": dates, "minute": minute})
            reasons = _flag(reasons, keys.duplicated(), "duplicate minute")
            return reasons

        # assessments
        score = df["vas_score"]
        reasons = _flag(reasons, score.isna(), "malformed vas_score")
        reasons = _flag(reasons, score != np.round(score), "non-integer vas_score")
        reasons = _flag(reasons, (score < VAS_MIN) | (score > VAS_MAX), "vas_score out of range")
        keys = pd.DataFrame({"pid": df["participant_id"], "date": dates})
        reasons = _flag(reasons, keys.duplicated(), "duplicate assessment date")
        return reasons

    def validate_data_quality(self, df: pd.DataFrame, table: str,
                              reasons: Optional[pd.Series] = None) -> Tuple[bool, List[str]]:
        """
        Summarise row-level problems (``reasons`` from ``row_reasons`` if already computed)

        Returns:
            Tuple of (is_valid, list_of_warnings)
        """
        warnings = []
        if df is None or df.empty:
            warnings.append(f"{table}.csv is empty")
            return False, warnings

        if reasons is None:
            reasons = self.row_reasons(df, table)
        counts = reasons.value_counts()
        for reason, count in sorted(counts.items()):
            warnings.append(f"{table}.csv: {count} rows with {reason}")

        is_valid = len(warnings) == 0
        if is_valid:
            logger.info(f"Data quality validation passed for {table}.csv")
        else:
            logger.warning(f"Data quality issues found: {warnings}")
        return is_valid, warnings

    def validate(self, df: pd.DataFrame, table: str,
                 reasons: Optional[pd.Series] = None) -> Tuple[bool, List[str], List[str]]:
        """
        Run complete validation (schema + quality)

        Returns:
            Tuple of (is_valid, schema_errors, quality_warnings)
        """
        schema_valid, schema_errors = self.validate_schema(list(df.columns), table)
        if schema_valid:
            quality_valid, quality_warnings = self.validate_data_quality(df, table, reasons)
        else:
            quality_warnings = ["Skipped quality validation due to schema errors"]
            quality_valid = False
        return schema_valid and quality_valid, schema_errors, quality_warnings

    def filter_invalid_rows(self, df: pd.DataFrame, table: str,
                            reasons: Optional[pd.Series] = None) -> Tuple[pd.DataFrame, pd.DataFrame]:
        """
        Split a table into accepted rows and rejected rows

        Accepted rows get a parsed ``date`` column (days and assessments).
        Rejected rows keep ``row_number``, ``participant_id`` and a ``reason``.
        """
        if reasons is None:
            reasons = self.row_reasons(df, table)
        rejected = df.loc[reasons.notna(), ["row_number", "participant_id"]].assign(
            table=table, reason=reasons[reasons.notna()]
        )
        kept = df.loc[reasons.isna()].copy()
        if "date" in kept.columns:
            kept["date"] = parse_date_column(kept["date"])

        if not rejected.empty:
            for reason, count in rejected["reason"].value_counts().sort_index().items():
                logger.warning(f"Rejected {count} rows from {table}.csv: {reason}")
        return kept, rejected.reset_index(drop=True)

    @staticmethod
    def summarize_rejections(rejected: pd.DataFrame) -> Dict[str, int]:
        """``"<table>: <reason>" -> count``"""
        if rejected.empty:
            return {}
        grouped = rejected.groupby(["table", "reason"]).size()
        return {f"{table}: {reason}": int(count) for (table, reason), count in grouped.items()}
