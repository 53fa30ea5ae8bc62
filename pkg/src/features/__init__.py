"""
Time-series Features Module

Statistical, temporal and spectral feature extraction per channel, the
day-over-day deviance transforms, and feature-matrix assembly.
"""

from .statistical import extract_statistical, STATISTICAL_FEATURES
from .temporal import extract_temporal, TEMPORAL_FEATURES
from .spectral import extract_spectral, power_spectrum, SPECTRAL_FEATURES
from .deviance import FeatureVector, DevianceVector, deviance, DEVIANCE_VARIANTS
from .matrix import FeatureMatrix, build_feature_matrix, extract_day_features

__all__ = [
    'extract_statistical',
    'extract_temporal',
    'extract_spectral',
    'power_spectrum',
    'STATISTICAL_FEATURES',
    'TEMPORAL_FEATURES',
    'SPECTRAL_FEATURES',
    'FeatureVector',
    'DevianceVector',
    'deviance',
    'DEVIANCE_VARIANTS',
    'FeatureMatrix',
    'build_feature_matrix',
    'extract_day_features',
]
