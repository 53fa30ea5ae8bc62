"""
Tests for feature extraction, deviance transforms and matrix assembly
"""

import math
import sys
from datetime import date
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent.parent))

from src.cohort import Cohort, EncodingPlan, PainAssessment
from src.config.settings import settings
from src.features import (
    DEVIANCE_VARIANTS, FeatureVector, SPECTRAL_FEATURES, STATISTICAL_FEATURES, TEMPORAL_FEATURES,
    build_feature_matrix, deviance, extract_spectral, extract_statistical, extract_temporal,
    power_spectrum
)
from src.features.deviance import flatten_block
from src.features.spectral import lpc, lpcc, wavelet_details
from src.utils.errors import FeatureKeyError, PainFairError, SeriesTooShortError
from tests import feature_oracles as oracle
from tests.test_cohort import create_sample_cohort, create_sample_day, create_sample_profile

FS = settings.sample_rate_hz


def create_sample_series(n=64, seed=0):
    rng = np.random.default_rng(seed)
    return np.round(70 + np.cumsum(rng.normal(0, 2, n)), 2)


def _assert_close(actual, expected, name, rel=1e-9, abs_tol=1e-9):
    assert np.allclose(np.asarray(actual, dtype=float), np.asarray(expected, dtype=float),
                       rtol=rel, atol=abs_tol), f"{name}: {actual} != {expected}"


def test_statistical_examples():
    flat = extract_statistical([3, 3, 3, 3])
    assert flat["variance"] == 0.0
    assert flat["interquartile_range"] == 0.0
    assert flat["skewness"] == 0.0 and flat["kurtosis"] == 0.0

    ramp = extract_statistical([1, 2, 3, 4])
    assert ramp["mean"] == pytest.approx(2.5)
    assert ramp["rms"] == pytest.approx(math.sqrt(7.5))
    assert ramp["median"] == pytest.approx(2.5)
    assert ramp["interquartile_range"] == pytest.approx(1.5)


def test_statistical_matches_reference():
    for seed in range(5):
        x = create_sample_series(n=37 + seed, seed=seed)
        features = extract_statistical(x)
        expected = oracle.statistical(x.tolist())
        for name, value in expected.items():
            _assert_close(features[name], value, name)


def test_statistical_percentile_counts():
    x = np.arange(1.0, 11.0)
    features = extract_statistical(x)
    _assert_close(features["ecdf_percentile"], [oracle.quantile(x, 0.2), oracle.quantile(x, 0.8)], "percentile")
    assert features["ecdf_percentile_count"].tolist() == [2.0, 8.0]


def test_temporal_examples():
    assert extract_temporal([1, -1, 1, -1], FS)["zero_crossing_rate"] == 3.0
    bump = extract_temporal([0, 1, 0], FS)
    assert bump["negative_turning_points"] == 1.0
    assert bump["positive_turning_points"] == 0.0
    assert bump["peak_to_peak"] == 1.0


def test_temporal_matches_reference():
    for seed, fs in ((0, FS), (1, 1.0), (2, 4.0)):
        x = create_sample_series(n=80, seed=seed) - 70.0
        features = extract_temporal(x, fs)
        expected = oracle.temporal(x.tolist(), fs)
        for name, value in expected.items():
            _assert_close(features[name], value, name, rel=1e-8)


def test_neighbourhood_peaks_needs_strict_maximum():
    x = np.zeros(41)
    x[20] = 1.0
    assert extract_temporal(x, 1.0)["neighbourhood_peaks"] == 1.0
    x[25] = 1.0
    assert extract_temporal(x, 1.0)["neighbourhood_peaks"] == 0.0, "ties are not peaks"


def test_spectral_matches_reference():
    for seed, fs in ((3, FS), (4, 1.0)):
        x = create_sample_series(n=128, seed=seed)
        features = extract_spectral(x, fs)
        expected = oracle.spectral(x.tolist(), fs)
        for name, value in expected.items():
            _assert_close(features[name], value, name, rel=1e-7, abs_tol=1e-12)


def test_sine_fundamental_and_centroid():
    n, k = 1440, 30
    t = np.arange(n)
    x = np.sin(2 * np.pi * k * t / n)
    features = extract_spectral(x, FS)
    expected = k * FS / n
    bin_width = FS / n
    assert abs(features["fundamental_frequency"] - expected) <= bin_width
    assert features["spectral_centroid"] == pytest.approx(expected, rel=0.05)


def test_constant_series_has_zero_spectrum_features():
    features = extract_spectral(np.full(64, 5.0), FS)
    assert features["spectral_entropy"] == 0.0
    assert all(np.all(np.asarray(features[name]) == 0.0) for name in SPECTRAL_FEATURES)


def test_white_noise_median_frequency():
    x = np.random.default_rng(12).normal(size=4096)
    nyquist = 0.5
    median = extract_spectral(x, 1.0)["median_frequency"]
    assert median == pytest.approx(nyquist / 2, rel=0.1), f"median frequency {median}"


def test_parseval():
    x = create_sample_series(n=300, seed=9)
    _, power = power_spectrum(x, FS)
    assert power.sum() == pytest.approx(np.sum(x ** 2), rel=1e-6)


def test_wavelet_matches_haar_reference():
    x = create_sample_series(n=64, seed=5)
    details = wavelet_details(x)
    expected = oracle.haar_details(x.tolist())
    for level, (got, want) in enumerate(zip(details, expected), start=1):
        _assert_close(np.abs(got), np.abs(want), f"level {level}", rel=1e-10)

    features = extract_spectral(x, FS)
    _assert_close(features["wavelet_energy"], [sum(v * v for v in d) for d in expected], "wavelet_energy")
    _assert_close(features["wavelet_variance"], [np.var(d) for d in expected], "wavelet_variance")


def test_short_series_gives_empty_deep_levels():
    details = wavelet_details(np.arange(8.0))
    assert [d.size for d in details] == [4, 2, 1, 0, 0]


def test_lpc_matches_levinson():
    rng = np.random.default_rng(30)
    x = np.zeros(1440)
    noise = rng.normal(size=1440)
    for t in range(2, 1440):
        x[t] = 1.2 * x[t - 1] - 0.5 * x[t - 2] + noise[t]
    a = lpc(x)
    _assert_close(a, oracle.levinson(x.tolist(), 12), "lpc", rel=1e-6, abs_tol=1e-8)
    assert a[0] == pytest.approx(1.2, abs=0.1) and a[1] == pytest.approx(-0.5, abs=0.1)
    assert lpcc(x)[0] == pytest.approx(a[0]), "first cepstral coefficient equals a_1"


def test_multi_valued_shapes():
    features = extract_spectral(create_sample_series(n=256, seed=2), FS)
    assert features["lpcc"].shape == (12,)
    assert features["mfcc"].shape == (12,)
    assert np.all(np.isfinite(features["mfcc"]))
    for name in ("wavelet_abs_mean", "wavelet_energy", "wavelet_std", "wavelet_variance"):
        assert features[name].shape == (5,), name


def test_extractors_follow_catalog_order():
    x = create_sample_series(n=64)
    assert tuple(extract_statistical(x)) == STATISTICAL_FEATURES
    assert tuple(extract_temporal(x, FS)) == TEMPORAL_FEATURES
    assert tuple(extract_spectral(x, FS)) == SPECTRAL_FEATURES


def test_short_series_rejected():
    with pytest.raises(SeriesTooShortError, match="series too short"):
        extract_statistical([1.0])
    with pytest.raises(SeriesTooShortError):
        extract_temporal([1.0, 2.0], FS)
    with pytest.raises(SeriesTooShortError):
        extract_spectral(np.arange(7.0), FS)
    with pytest.raises(PainFairError, match="impute"):
        extract_statistical([1.0, np.nan, 2.0])


def test_shift_and_scale_properties():
    x = create_sample_series(n=128, seed=6)
    base_stat, base_spec = extract_statistical(x), extract_spectral(x, FS)
    shifted_stat = extract_statistical(x + 25.0)
    scaled_stat, scaled_spec = extract_statistical(3.0 * x), extract_spectral(3.0 * x + 10.0, FS)

    assert shifted_stat["mean"] == pytest.approx(base_stat["mean"] + 25.0)
    for name in ("std", "variance", "interquartile_range", "skewness", "kurtosis"):
        assert shifted_stat[name] == pytest.approx(base_stat[name], rel=1e-9, abs=1e-9), name
    assert scaled_stat["std"] == pytest.approx(3.0 * base_stat["std"])
    assert scaled_stat["skewness"] == pytest.approx(base_stat["skewness"], abs=1e-9)
    for name in ("spectral_centroid", "spectral_spread", "spectral_entropy", "median_frequency"):
        assert scaled_spec[name] == pytest.approx(base_spec[name], rel=1e-9), name


def test_flatten_block_naming():
    values = {"mean": 1.0, "ecdf": np.array([0.1, 0.5, 0.9])}
    names, flat = flatten_block("statistical", "hr", values)
    assert names == ("statistical.mean.hr", "statistical.ecdf.hr")
    assert flat.tolist() == [1.0, 0.1]

    names, flat = flatten_block("statistical", "hr", values, expand_multivalued=True)
    assert names[1:] == ("statistical.ecdf_0.hr", "statistical.ecdf_1.hr", "statistical.ecdf_2.hr")
    assert flat.size == 4


def test_deviance_examples():
    today, yesterday = FeatureVector(("f",), [4.0]), FeatureVector(("f",), [2.0])
    assert deviance(today, yesterday, "logarithmic").values[0] == pytest.approx(math.log(2))
    assert deviance(today, yesterday, "mathematical").values[0] == 2.0
    assert deviance(today, yesterday, "logcosh").values[0] == pytest.approx(1.3250, abs=1e-4)
    assert deviance(today, yesterday, "cosine").values[0] == pytest.approx(math.cos(4) * math.cos(2))

    same = FeatureVector(("a", "b"), [1.5, -3.0])
    assert np.all(deviance(same, same, "mathematical").values == 0.0)
    assert deviance(same, same, "logcosh").column_names() == ("a.logcosh", "b.logcosh")


def test_logcosh_bounds():
    diffs = np.linspace(-800.0, 800.0, 1601)
    current = FeatureVector(tuple(f"f{i}" for i in range(diffs.size)), diffs)
    previous = FeatureVector(current.names, np.zeros(diffs.size))
    values = deviance(current, previous, "logcosh").values
    assert np.all(np.isfinite(values))
    assert np.all(values >= 0.0)
    assert np.all(values <= np.abs(diffs) + 1e-12)


def test_deviance_key_space_checks():
    with pytest.raises(FeatureKeyError):
        deviance(FeatureVector(("a",), [1.0]), FeatureVector(("b",), [1.0]), "mathematical")
    with pytest.raises(PainFairError, match="Unknown deviance variant"):
        deviance(FeatureVector(("a",), [1.0]), FeatureVector(("a",), [1.0]), "ratio")
    with pytest.raises(PainFairError, match="non-finite"):
        FeatureVector(("a",), [np.inf])
    assert set(DEVIANCE_VARIANTS) == {"mathematical", "logarithmic", "cosine", "logcosh"}


def _two_day_cohort() -> Cohort:
    d0, d1 = date(2022, 3, 9), date(2022, 3, 10)
    return Cohort(
        profiles={"P1": create_sample_profile("P1")},
        days={("P1", d0): create_sample_day("P1", d0, seed=1), ("P1", d1): create_sample_day("P1", d1, seed=2)},
        assessments={"P1": [PainAssessment("P1", date(2022, 3, 1), 7), PainAssessment("P1", d1, 5)]},
    )


def test_matrix_statistical_hr():
    cohort = create_sample_cohort(n_participants=6)
    plan = EncodingPlan(mode="features", domains=("statistical",), channels=("hr",))
    matrix = build_feature_matrix(cohort, plan)
    assert matrix.shape[1] == 16
    assert matrix.shape[0] == len(matrix.labels) > 0
    assert all(c.startswith("statistical.") and c.endswith(".hr") for c in matrix.columns)

    threaded = build_feature_matrix(cohort, plan, workers=3)
    assert np.array_equal(threaded.values, matrix.values)
    assert threaded.keys == matrix.keys


def test_matrix_deviance_columns_and_demographics(tmp_path):
    plan = EncodingPlan(mode="features", domains=("statistical",), channels=("hr",),
                        variants=("mathematical",), include_demographics=True)
    matrix = build_feature_matrix(_two_day_cohort(), plan)
    assert matrix.shape == (1, 3 + 16)
    assert matrix.columns[:3] == ("demographic.age", "demographic.gender", "demographic.dementia")
    assert all(c.endswith(".hr.mathematical") for c in matrix.columns[3:])
    assert matrix.labels.tolist() == [1]

    path = matrix.to_csv(tmp_path / "features.csv")
    header = path.read_text().splitlines()[0].split(",")
    assert header[:3] == ["participant_id", "date", "label"]


def test_matrix_without_previous_day_is_empty():
    cohort = _two_day_cohort()
    missing = Cohort(cohort.profiles, {k: v for k, v in cohort.days.items() if k[1].day == 10},
                     cohort.assessments)
    plan = EncodingPlan(mode="features", domains=("temporal",), channels=("steps",), variants=("logcosh",))
    with pytest.raises(PainFairError, match="empty matrix"):
        build_feature_matrix(missing, plan)
