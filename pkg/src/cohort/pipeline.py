"""Cohort ingestion pipeline: CSV bundle -> validated, filtered Cohort"""
from collections import defaultdict
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.cohort.instances import build_instances
from src.cohort.models import Cohort, DayRecord, EncodingPlan, PainAssessment, ProtectedProfile
from src.cohort.storage import BundleStorage, TABLE_SCHEMAS
from src.cohort.validator import CohortValidator
from src.config.settings import settings
from src.utils.errors import CohortError, EmptyCohortError
from src.utils.logger import get_pipeline_logger, get_error_logger

logger = get_pipeline_logger()
error_logger = get_error_logger()


def _has_assessments_in_one_year(assessments: List[PainAssessment]) -> bool:
    per_year = defaultdict(int)
    for a in assessments:
        per_year[a.date.year] += 1
    return any(count >= settings.min_assessments_per_year for count in per_year.values())


class CohortIngestionPipeline:
    """Orchestrate bundle reading, row validation and the inclusion rule"""

    def __init__(self, plan: Optional[EncodingPlan] = None):
        """
        Args:
            plan: Encoding plan used to derive instances (defaults to raw mode)
        """
        self.plan = plan or EncodingPlan()
        self.validator = CohortValidator()

    def _read_tables(self, storage: BundleStorage, results: Dict[str, Any]) -> Dict[str, pd.DataFrame]:
        summary = storage.get_bundle_summary()
        results["rows_read"] = dict(zip(summary["table"], summary["row_count"].astype(int)))

        tables, rejected = {}, []
        for table in TABLE_SCHEMAS:
            is_valid, errors = self.validator.validate_schema(storage.get_columns(table), table)
            if not is_valid:
                raise CohortError("; ".join(errors))
            df = storage.query_table(table)
            reasons = self.validator.row_reasons(df, table)
            clean, _, _ = self.validator.validate(df, table, reasons)
            results["tables_clean"][table] = clean
            kept, dropped = self.validator.filter_invalid_rows(df, table, reasons)
            tables[table] = kept
            rejected.append(dropped)

        rejected = pd.concat(rejected, ignore_index=True)
        results["rows_rejected"] = int(len(rejected))
        results["rejections"] = self.validator.summarize_rejections(rejected)
        for reason, count in results["rejections"].items():
            results["warnings"].append(f"{count} rows rejected ({reason})")
        return tables

    @staticmethod
    def _build_days(days: pd.DataFrame) -> Dict[Tuple[str, Any], Tuple[np.ndarray, np.ndarray]]:
        """Scatter long-format minute rows into per-day channel arrays (NaN = missing)."""
        channels = {}
        minutes = settings.minutes_per_day
        for (pid, day), group in days.groupby(["participant_id", "date"], sort=True):
            hr = np.full(minutes, np.nan)
            steps = np.full(minutes, np.nan)
            idx = group["minute_index"].to_numpy(dtype=int)
            hr[idx] = group["heart_rate"].to_numpy(dtype=float)
            steps[idx] = group["steps"].to_numpy(dtype=float)
            channels[(pid, day)] = (hr, steps)
        return channels

    def run(self, bundle_path: Union[str, Path]) -> Tuple[Cohort, Dict[str, Any]]:
        """
        Run the complete ingestion pipeline

        Args:
            bundle_path: Directory holding participants.csv, days.csv, assessments.csv

        Returns:
            Tuple of (cohort, results dictionary)

        Raises:
            FileNotFoundError: bundle or one of its files is missing
            CohortError: a table misses required columns
            EmptyCohortError: no participant survives the inclusion rule
        """
        logger.info(f"Starting cohort ingestion from {bundle_path}")
        start_time = datetime.now()
        results: Dict[str, Any] = {
            "participants_read": 0,
            "participants_included": 0,
            "participants_excluded": 0,
            "days_rejected": 0,
            "rows_read": {},
            "tables_clean": {},
            "exclusions": {},
            "errors": [],
            "warnings": [],
        }

        with BundleStorage(bundle_path) as storage:
            tables = self._read_tables(storage, results)

        profiles = {}
        for row in tables["participants"].itertuples(index=False):
            profiles[row.participant_id] = ProtectedProfile(
                participant_id=row.participant_id,
                gender=row.gender,
                race=row.race,
                ethnicity=row.ethnicity,
                age=int(row.age),
                dementia=row.dementia,
            )
        results["participants_read"] = len(profiles)

        assessments: Dict[str, List[PainAssessment]] = defaultdict(list)
        for row in tables["assessments"].itertuples(index=False):
            assessments[row.participant_id].append(
                PainAssessment(row.participant_id, row.date, int(row.vas_score))
            )

        channels = self._build_days(tables["days"])

        orphans = (set(assessments) | {pid for pid, _ in channels}) - set(profiles)
        for pid in sorted(orphans):
            msg = f"{pid}: rows reference a participant missing from participants.csv"
            logger.warning(msg)
            results["warnings"].append(msg)

        days = {}
        missing_by_pid = defaultdict(lambda: [0, 0])
        for (pid, day), (hr, steps) in channels.items():
            if pid not in profiles:
                continue
            hr_missing, steps_missing = int(np.isnan(hr).sum()), int(np.isnan(steps).sum())
            missing_by_pid[pid][0] += max(hr_missing, steps_missing)
            missing_by_pid[pid][1] += settings.minutes_per_day
            worst = max(hr_missing, steps_missing) / settings.minutes_per_day
            if worst > settings.max_missing_fraction:
                msg = f"{pid} {day}: day rejected, {worst:.1%} of minutes missing"
                logger.warning(msg)
                results["warnings"].append(msg)
                results["days_rejected"] += 1
                continue
            try:
                days[(pid, day)] = DayRecord(pid, day, hr, steps)
            except CohortError as e:
                logger.warning(f"{pid} {day}: day rejected, {e}")
                results["days_rejected"] += 1

        included = {}
        for pid, profile in sorted(profiles.items()):
            try:
                reason = None
                if not _has_assessments_in_one_year(assessments.get(pid, [])):
                    reason = "insufficient assessments"
                elif pid not in missing_by_pid:
                    reason = "no wearable data"
                else:
                    missing, total = missing_by_pid[pid]
                    if missing / total > settings.max_missing_fraction:
                        reason = f"missing data {missing / total:.1%} exceeds {settings.max_missing_fraction:.0%}"

                if reason:
                    logger.warning(f"Excluded participant {pid}: {reason}")
                    results["exclusions"][pid] = reason
                    continue
                included[pid] = profile
            except Exception as e:
                error_msg = f"{pid}: ingestion error - {str(e)}"
                logger.error(error_msg)
                error_logger.error(error_msg, exc_info=True)
                results["errors"].append(error_msg)
                results["exclusions"][pid] = "ingestion error"

        results["participants_included"] = len(included)
        results["participants_excluded"] = len(results["exclusions"])

        if not included:
            error_msg = f"Empty cohort after filtering {bundle_path}"
            error_logger.error(error_msg)
            raise EmptyCohortError(error_msg)

        cohort = Cohort(
            profiles=included,
            days={key: rec for key, rec in days.items() if key[0] in included},
            assessments={pid: items for pid, items in assessments.items() if pid in included},
        )
        cohort = build_instances(cohort, self.plan)
        results["instances_built"] = len(cohort)

        duration = (datetime.now() - start_time).total_seconds()
        logger.info("=" * 50)
        logger.info("COHORT INGESTION SUMMARY")
        logger.info("=" * 50)
        logger.info(f"Duration: {duration:.2f} seconds")
        logger.info(f"Participants included: {results['participants_included']}/{results['participants_read']}")
        logger.info(f"Participants excluded: {results['participants_excluded']}")
        logger.info(f"Rows rejected: {results['rows_rejected']}")
        logger.info(f"Days rejected: {results['days_rejected']}")
        logger.info(f"Instances built: {results['instances_built']}")
        logger.info(f"Errors: {len(results['errors'])}")
        logger.info(f"Warnings: {len(results['warnings'])}")
        logger.info("=" * 50)
        results["duration_seconds"] = duration

        return cohort, results


def ingest_cohort(bundle_path: Union[str, Path], plan: Optional[EncodingPlan] = None) -> Cohort:
    """
    Convenience function to run the ingestion pipeline

    Args:
        bundle_path: Directory holding the three bundle CSV files
        plan: Encoding plan for instance derivation

    Returns:
        Cohort with instances built under ``plan``
    """
    cohort, _ = CohortIngestionPipeline(plan).run(bundle_path)
    return cohort
