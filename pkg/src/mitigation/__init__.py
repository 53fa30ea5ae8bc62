"""
Mitigation Module

Comparator bias mitigators: reweighing and disparate impact repair
(pre-processing), reject option classification (post-processing).
"""

from .base import BaseMitigator
from .reweighing import Reweighing, ReweighingTable, reweigh
from .disparate_impact import DisparateImpactRemover, RepairPlan, dir_repair, fit_repair
from .reject_option import RejectOptionClassifier, roc_adjust

__all__ = [
    'BaseMitigator',
    'Reweighing',
    'ReweighingTable',
    'reweigh',
    'DisparateImpactRemover',
    'RepairPlan',
    'dir_repair',
    'fit_repair',
    'RejectOptionClassifier',
    'roc_adjust',
]
