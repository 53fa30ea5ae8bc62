"""
Spectral-domain features

Twenty-six features of a single channel. The one-sided spectrum excludes the
DC bin: for bins k >= 1, X_k = rfft(x)[k], P_k = |X_k|^2 / n, f_k the bin
frequency. Distribution-shape features weight frequencies by P_k / sum(P).
A constant series has no non-DC power; every spectral feature is then 0.

Fixed parameters: LPCC order 12 (autocorrelation method), 20 triangular mel
filters over [0, Nyquist] with 12 kept cepstral coefficients, 5-level Haar
decomposition (periodization) for the wavelet features.
"""

from typing import Dict, Tuple

import numpy as np
import pywt
from scipy.fft import dct
from scipy.linalg import solve_toeplitz

from src.config.settings import settings
from src.features.statistical import as_series, FeatureValue
from src.features.temporal import shannon_entropy, turning_points

SPECTRAL_FEATURES = (
    "fft_mean_coefficient",
    "fundamental_frequency",
    "human_range_energy",
    "lpcc",
    "mfcc",
    "max_power_spectrum",
    "max_frequency",
    "median_frequency",
    "power_bandwidth",
    "spectral_centroid",
    "spectral_decrease",
    "spectral_distance",
    "spectral_entropy",
    "spectral_kurtosis",
    "spectral_positive_turning_points",
    "spectral_roll_off",
    "spectral_roll_on",
    "spectral_skewness",
    "spectral_slope",
    "spectral_spread",
    "spectral_variation",
    "wavelet_abs_mean",
    "wavelet_energy",
    "wavelet_std",
    "wavelet_variance",
    "wavelet_entropy",
)

MIN_LENGTH = 8
LPCC_ORDER = 12
MEL_FILTERS = 20
MFCC_COEFFICIENTS = 12
MEL_LOG_FLOOR = 1e-10
WAVELET = "haar"
WAVELET_LEVELS = 5

MULTI_VALUED_WIDTHS = {
    "lpcc": LPCC_ORDER,
    "mfcc": MFCC_COEFFICIENTS,
    "wavelet_abs_mean": WAVELET_LEVELS,
    "wavelet_energy": WAVELET_LEVELS,
    "wavelet_std": WAVELET_LEVELS,
    "wavelet_variance": WAVELET_LEVELS,
}


def power_spectrum(series, sample_rate: float = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Two-sided power spectrum |FFT(x)|^2 / n and its frequencies.

    Parseval: ``power.sum()`` equals ``sum(x**2)``.
    """
    x = np.asarray(series, dtype=float).ravel()
    fs = sample_rate or settings.sample_rate_hz
    spectrum = np.fft.fft(x)
    return np.fft.fftfreq(x.size, d=1.0 / fs), np.abs(spectrum) ** 2 / x.size


def one_sided_spectrum(x: np.ndarray, fs: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(frequencies, magnitudes, powers) for bins k >= 1 of rfft(x)."""
    spectrum = np.fft.rfft(x)[1:]
    freqs = np.fft.rfftfreq(x.size, d=1.0 / fs)[1:]
    magnitude = np.abs(spectrum)
    return freqs, magnitude, magnitude ** 2 / x.size


def _cumulative_frequency(freqs: np.ndarray, power: np.ndarray, fraction: float) -> float:
    """Lowest frequency at which cumulative power reaches ``fraction`` of the total."""
    cumulative = np.cumsum(power) / np.sum(power)
    return float(freqs[np.argmax(cumulative >= fraction)])


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    denom = np.sum(xc ** 2)
    return float(np.sum(xc * (y - y.mean())) / denom) if denom > 0 else 0.0


def lpc(x: np.ndarray, order: int = LPCC_ORDER) -> np.ndarray:
    """
    Linear prediction coefficients a_1..a_p, x_t ~ sum_k a_k x_{t-k}.

    Autocorrelation method on the mean-removed series (biased estimates
    r_0..r_p). Returns zeros when the Toeplitz system is singular.
    """
    centred = x - x.mean()
    n = centred.size
    r = np.array([np.dot(centred[:n - lag], centred[lag:]) for lag in range(order + 1)])
    if r[0] <= 0:
        return np.zeros(order)
    try:
        a = solve_toeplitz(r[:order], r[1:order + 1])
    except np.linalg.LinAlgError:
        return np.zeros(order)
    if not np.all(np.isfinite(a)):
        return np.zeros(order)
    return a


def lpcc(x: np.ndarray, order: int = LPCC_ORDER) -> np.ndarray:
    """Cepstral coefficients c_1..c_p from the LPC recursion c_m = a_m + sum_{k<m} (k/m) c_k a_{m-k}."""
    a = lpc(x, order)
    c = np.zeros(order)
    for m in range(1, order + 1):
        acc = a[m - 1]
        for k in range(1, m):
            acc += (k / m) * c[k - 1] * a[m - k - 1]
        c[m - 1] = acc
    return c


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(freqs: np.ndarray, fs: float, n_filters: int = MEL_FILTERS) -> np.ndarray:
    """Triangular filters, edges equally spaced on the mel scale over [0, fs/2]. Shape (n_filters, len(freqs))."""
    edges = _mel_to_hz(np.linspace(_hz_to_mel(0.0), _hz_to_mel(fs / 2.0), n_filters + 2))
    bank = np.zeros((n_filters, freqs.size))
    for j in range(1, n_filters + 1):
        left, centre, right = edges[j - 1], edges[j], edges[j + 1]
        rising = (freqs >= left) & (freqs <= centre)
        falling = (freqs > centre) & (freqs <= right)
        bank[j - 1, rising] = (freqs[rising] - left) / (centre - left)
        bank[j - 1, falling] = (right - freqs[falling]) / (right - centre)
    return bank


def mfcc(freqs: np.ndarray, power: np.ndarray, fs: float) -> np.ndarray:
    """First 12 coefficients of the orthonormal DCT-II of log mel-filter energies."""
    energies = mel_filterbank(freqs, fs) @ power
    return dct(np.log(energies + MEL_LOG_FLOOR), type=2, norm="ortho")[:MFCC_COEFFICIENTS]


def wavelet_details(x: np.ndarray) -> list:
    """Detail coefficients for levels 1 (finest) .. 5; levels beyond log2(n) are empty."""
    levels = min(WAVELET_LEVELS, int(np.floor(np.log2(x.size))))
    coeffs = pywt.wavedec(x, WAVELET, mode="periodization", level=levels)
    details = [np.asarray(coeffs[-j]) for j in range(1, levels + 1)]
    return details + [np.zeros(0)] * (WAVELET_LEVELS - levels)


def _per_level(details: list, fn) -> np.ndarray:
    return np.array([fn(d) if d.size else 0.0 for d in details], dtype=float)


def _zero_features() -> Dict[str, FeatureValue]:
    return {
        name: np.zeros(MULTI_VALUED_WIDTHS[name]) if name in MULTI_VALUED_WIDTHS else 0.0
        for name in SPECTRAL_FEATURES
    }


def extract_spectral(series, sample_rate: float = None) -> Dict[str, FeatureValue]:
    """
    Spectral features of one channel

    Args:
        series: Real sequence of length >= 8
        sample_rate: Sampling frequency in Hz (defaults to minute resolution)

    Returns:
        Ordered mapping of the 26 feature names to values; ``lpcc`` and
        ``mfcc`` carry 12 components, per-level wavelet features 5.
    """
    x = as_series(series, MIN_LENGTH)
    fs = sample_rate or settings.sample_rate_hz
    if np.ptp(x) == 0:
        return _zero_features()

    freqs, magnitude, power = one_sided_spectrum(x, fs)
    total = float(np.sum(power))
    p = power / total
    centroid = float(np.sum(freqs * p))
    spread = float(np.sqrt(np.sum((freqs - centroid) ** 2 * p)))

    low, high = settings.human_range_hz
    in_band = (freqs >= low) & (freqs <= high)

    half_power = power >= power.max() / 2.0
    band = freqs[half_power]

    k = np.arange(1, magnitude.size)
    decrease_den = np.sum(magnitude[1:])
    cumulative_mag = np.cumsum(magnitude)
    line = np.linspace(0.0, cumulative_mag[-1], cumulative_mag.size)

    if magnitude.size > 1:
        prev, curr = magnitude[:-1], magnitude[1:]
        norms = np.sqrt(np.sum(prev ** 2)) * np.sqrt(np.sum(curr ** 2))
        variation = float(1.0 - np.sum(prev * curr) / norms) if norms > 0 else 0.0
    else:
        variation = 0.0

    _, spectral_minima = turning_points(power)
    details = wavelet_details(x)
    level_energy = _per_level(details, lambda d: float(np.sum(d ** 2)))
    energy_total = level_energy.sum()

    return {
        "fft_mean_coefficient": float(np.mean(magnitude)),
        "fundamental_frequency": float(freqs[np.argmax(magnitude)]),
        "human_range_energy": float(np.sum(power[in_band]) / total),
        "lpcc": lpcc(x),
        "mfcc": mfcc(freqs, power, fs),
        "max_power_spectrum": float(power.max()),
        "max_frequency": _cumulative_frequency(freqs, power, 0.95),
        "median_frequency": _cumulative_frequency(freqs, power, 0.5),
        "power_bandwidth": float(band[-1] - band[0]),
        "spectral_centroid": centroid,
        "spectral_decrease": float(np.sum((magnitude[1:] - magnitude[0]) / k) / decrease_den)
        if decrease_den > 0 else 0.0,
        "spectral_distance": float(np.sum(line - cumulative_mag)),
        "spectral_entropy": shannon_entropy(p) / np.log(p.size) if p.size > 1 else 0.0,
        "spectral_kurtosis": float(np.sum((freqs - centroid) ** 4 * p) / spread ** 4) if spread > 0 else 0.0,
        "spectral_positive_turning_points": float(spectral_minima),
        "spectral_roll_off": _cumulative_frequency(freqs, power, 0.85),
        "spectral_roll_on": _cumulative_frequency(freqs, power, 0.05),
        "spectral_skewness": float(np.sum((freqs - centroid) ** 3 * p) / spread ** 3) if spread > 0 else 0.0,
        "spectral_slope": _slope(freqs, magnitude),
        "spectral_spread": spread,
        "spectral_variation": variation,
        "wavelet_abs_mean": _per_level(details, lambda d: float(np.mean(np.abs(d)))),
        "wavelet_energy": level_energy,
        "wavelet_std": _per_level(details, lambda d: float(np.std(d))),
        "wavelet_variance": _per_level(details, lambda d: float(np.var(d))),
        "wavelet_entropy": shannon_entropy(level_energy / energy_total) if energy_total > 0 else 0.0,
    }
