"""
Temporal-domain features

Eighteen features of a single channel sampled at ``sample_rate`` Hz.
Time-based quantities (area, centroid, slope, total energy) use seconds.
"""

from typing import Dict

import numpy as np
from scipy.integrate import trapezoid

from src.config.settings import settings
from src.features.statistical import as_series, histogram

TEMPORAL_FEATURES = (
    "abs_energy",
    "auc",
    "autocorrelation",
    "centroid",
    "entropy",
    "mean_abs_diff",
    "mean_diff",
    "median_abs_diff",
    "median_diff",
    "negative_turning_points",
    "positive_turning_points",
    "peak_to_peak",
    "signal_distance",
    "slope",
    "sum_abs_diff",
    "total_energy",
    "zero_crossing_rate",
    "neighbourhood_peaks",
)

NEIGHBOURHOOD_WINDOW = 10
MIN_LENGTH = 3


def turning_points(x: np.ndarray) -> tuple:
    """
    (negative, positive) turning point counts.

    Negative: the first difference changes from > 0 to < 0 (a local maximum).
    Positive: it changes from < 0 to > 0 (a local minimum). Flat steps break
    a turning point.
    """
    d = np.diff(x)
    before, after = d[:-1], d[1:]
    negative = int(np.count_nonzero((before > 0) & (after < 0)))
    positive = int(np.count_nonzero((before < 0) & (after > 0)))
    return negative, positive


def shannon_entropy(probabilities: np.ndarray) -> float:
    p = probabilities[probabilities > 0]
    if p.size == 0:
        return 0.0
    return float(-np.sum(p * np.log(p)))


def neighbourhood_peaks(x: np.ndarray, window: int = NEIGHBOURHOOD_WINDOW) -> int:
    """Samples strictly greater than every other sample within ``window`` on each side."""
    n = x.size
    if n < 2 * window + 1:
        return 0
    windows = np.lib.stride_tricks.sliding_window_view(x, 2 * window + 1)
    centre = windows[:, window]
    neighbours = np.delete(windows, window, axis=1)
    return int(np.count_nonzero(centre > neighbours.max(axis=1)))


def extract_temporal(series, sample_rate: float = None) -> Dict[str, float]:
    """
    Temporal features of one channel

    Args:
        series: Real sequence of length >= 3
        sample_rate: Sampling frequency in Hz (defaults to minute resolution)

    Returns:
        Ordered mapping of the 18 feature names to values
    """
    x = as_series(series, MIN_LENGTH)
    fs = sample_rate or settings.sample_rate_hz
    n = x.size
    t = np.arange(n) / fs
    d = np.diff(x)
    energy = float(np.sum(x ** 2))
    centred = x - x.mean()
    denom = float(np.sum(centred ** 2))
    t_centred = t - t.mean()
    negative, positive = turning_points(x)

    return {
        "abs_energy": energy,
        "auc": float(trapezoid(x, dx=1.0 / fs)),
        "autocorrelation": float(np.sum(centred[:-1] * centred[1:]) / denom) if denom > 0 else 0.0,
        "centroid": float(np.sum(t * x ** 2) / energy) if energy > 0 else 0.0,
        "entropy": shannon_entropy(histogram(x)),
        "mean_abs_diff": float(np.mean(np.abs(d))),
        "mean_diff": float(np.mean(d)),
        "median_abs_diff": float(np.median(np.abs(d))),
        "median_diff": float(np.median(d)),
        "negative_turning_points": float(negative),
        "positive_turning_points": float(positive),
        "peak_to_peak": float(np.ptp(x)),
        "signal_distance": float(np.sum(np.sqrt(1.0 + d ** 2))),
        "slope": float(np.sum(t_centred * centred) / np.sum(t_centred ** 2)),
        "sum_abs_diff": float(np.sum(np.abs(d))),
        "total_energy": energy / (t[-1] - t[0]),
        "zero_crossing_rate": float(np.count_nonzero(np.sign(x[:-1]) * np.sign(x[1:]) < 0)),
        "neighbourhood_peaks": float(neighbourhood_peaks(x)),
    }
