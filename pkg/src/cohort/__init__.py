"""
Cohort Module

Data model, bundle ingestion, synthetic generation, preprocessing and
participant-level splitting.
"""

from .models import (
    Cohort, DayRecord, EncodingPlan, LabeledInstance, PainAssessment, ProtectedProfile,
    privileged_flag
)
from .preprocessing import (
    derive_labels, impute, minmax_normalize, apply_minmax, inverse_minmax, MinMaxRanges,
    encode_demographics
)
from .instances import build_instances
from .pipeline import ingest_cohort, CohortIngestionPipeline
from .storage import BundleStorage, write_bundle, save_cohort, load_cohort
from .synthetic import SynthConfig, synthesize_cohort
from .splitting import split

__all__ = [
    'Cohort',
    'DayRecord',
    'EncodingPlan',
    'LabeledInstance',
    'PainAssessment',
    'ProtectedProfile',
    'privileged_flag',
    'derive_labels',
    'impute',
    'minmax_normalize',
    'apply_minmax',
    'inverse_minmax',
    'MinMaxRanges',
    'encode_demographics',
    'build_instances',
    'ingest_cohort',
    'CohortIngestionPipeline',
    'BundleStorage',
    'write_bundle',
    'save_cohort',
    'load_cohort',
    'SynthConfig',
    'synthesize_cohort',
    'split',
]
