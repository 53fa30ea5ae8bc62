"""
Fairness Metrics Module

Statistical parity, disparate impact, equal opportunity, average odds and
Theil index, with verdicts and dataset-level bias detection.
"""

from .metrics import (
    GroupedOutcomes,
    FairnessReport,
    spd,
    disparate_impact,
    eod,
    aod,
    theil,
    accuracy,
    dataset_bias,
    confusion_by_group,
    verdict,
    report,
    METRICS,
    IDEAL_VALUES,
)

__all__ = [
    'GroupedOutcomes',
    'FairnessReport',
    'spd',
    'disparate_impact',
    'eod',
    'aod',
    'theil',
    'accuracy',
    'dataset_bias',
    'confusion_by_group',
    'verdict',
    'report',
    'METRICS',
    'IDEAL_VALUES',
]
