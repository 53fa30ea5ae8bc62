"""
Statistical-domain features

Sixteen base features of a single channel. Quantiles use linear
interpolation; skewness and kurtosis of a constant series are 0.
Definitions are written out in ``src/features/README.md``.
"""

from typing import Dict, Union

import numpy as np
from scipy import stats

from src.utils.errors import PainFairError, SeriesTooShortError

FeatureValue = Union[float, np.ndarray]

STATISTICAL_FEATURES = (
    "ecdf",
    "ecdf_percentile",
    "ecdf_percentile_count",
    "histogram",
    "interquartile_range",
    "kurtosis",
    "max",
    "mean",
    "mean_abs_deviation",
    "median",
    "median_abs_deviation",
    "min",
    "rms",
    "skewness",
    "std",
    "variance",
)

ECDF_PERCENTILES = (0.2, 0.8)
HISTOGRAM_BINS = 10
MIN_LENGTH = 2


def as_series(series, min_length: int) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if x.size < min_length:
        raise SeriesTooShortError(f"series too short: {x.size} samples, need at least {min_length}")
    if not np.all(np.isfinite(x)):
        raise PainFairError("series contains missing or non-finite values; impute first")
    return x


def histogram(x: np.ndarray, bins: int = HISTOGRAM_BINS) -> np.ndarray:
    """
    Normalised equal-width histogram over [min, max].

    Sample i falls in bin floor((x_i - min) / (max - min) * bins), with the
    maximum placed in the last bin. A constant series puts all mass in bin 0.
    """
    lo, hi = x.min(), x.max()
    if hi == lo:
        idx = np.zeros(x.size, dtype=int)
    else:
        idx = np.minimum(np.floor((x - lo) / (hi - lo) * bins).astype(int), bins - 1)
    return np.bincount(idx, minlength=bins).astype(float) / x.size


def _central_moment_ratio(x: np.ndarray, order: int) -> float:
    if np.ptp(x) == 0:
        return 0.0
    if order == 3:
        return float(stats.skew(x, bias=True))
    return float(stats.kurtosis(x, fisher=True, bias=True))


def extract_statistical(series) -> Dict[str, FeatureValue]:
    """
    Statistical features of one channel

    Args:
        series: Real sequence of length >= 2

    Returns:
        Ordered mapping of the 16 base feature names to values. ``ecdf``,
        ``ecdf_percentile``, ``ecdf_percentile_count`` and ``histogram`` are
        arrays (3, 2, 2 and 10 components).
    """
    x = as_series(series, MIN_LENGTH)
    n = x.size
    mean = float(np.mean(x))
    std = float(np.std(x, ddof=1))
    median = float(np.median(x))

    ecdf_points = np.array([mean - std, mean, mean + std])
    ecdf = np.array([np.count_nonzero(x <= t) / n for t in ecdf_points])
    percentiles = np.quantile(x, ECDF_PERCENTILES)
    percentile_counts = np.array([float(np.count_nonzero(x <= q)) for q in percentiles])
    q25, q75 = np.quantile(x, (0.25, 0.75))

    return {
        "ecdf": ecdf,
        "ecdf_percentile": percentiles,
        "ecdf_percentile_count": percentile_counts,
        "histogram": histogram(x),
        "interquartile_range": float(q75 - q25),
        "kurtosis": _central_moment_ratio(x, 4),
        "max": float(np.max(x)),
        "mean": mean,
        "mean_abs_deviation": float(np.mean(np.abs(x - mean))),
        "median": median,
        "median_abs_deviation": float(np.median(np.abs(x - median))),
        "min": float(np.min(x)),
        "rms": float(np.sqrt(np.mean(x ** 2))),
        "skewness": _central_moment_ratio(x, 3),
        "std": std,
        "variance": float(np.var(x, ddof=1)),
    }
