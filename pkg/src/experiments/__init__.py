"""
Experiments Module

Experiment specification, the grid engine and result containers.
"""

from .spec import ExperimentSpec, CNN_MODELS, BASELINE_MODELS, DEFAULT_BASELINE_PLAN
from .engine import ExperimentEngine, run_experiment
from .results import ExperimentResults, ResultTable, aggregate, cell_row

__all__ = [
    'ExperimentSpec',
    'CNN_MODELS',
    'BASELINE_MODELS',
    'DEFAULT_BASELINE_PLAN',
    'ExperimentEngine',
    'run_experiment',
    'ExperimentResults',
    'ResultTable',
    'aggregate',
    'cell_row',
]
