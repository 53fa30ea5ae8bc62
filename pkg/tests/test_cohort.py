"""
Tests for the cohort data model, ingestion, preprocessing and splitting
"""

import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.append(str(Path(__file__).parent.parent))

from src.cohort import (
    Cohort, CohortIngestionPipeline, DayRecord, EncodingPlan, PainAssessment, ProtectedProfile,
    SynthConfig, apply_minmax, build_instances, derive_labels, encode_demographics, impute,
    ingest_cohort, inverse_minmax, load_cohort, minmax_normalize, privileged_flag, save_cohort,
    split, synthesize_cohort, write_bundle
)
from src.cohort.validator import CohortValidator
from src.config.settings import settings
from src.fairness import dataset_bias
from src.utils.errors import CohortError, EmptyCohortError, ImputationError, SplitError

MINUTES = settings.minutes_per_day


def create_sample_cohort(n_participants=20, bias=None, seed=7, plan=None) -> Cohort:
    """Seeded synthetic cohort (raw encoding unless ``plan`` says otherwise)."""
    config = SynthConfig(n_participants=n_participants, bias=bias or {}, seed=seed)
    return synthesize_cohort(config, plan)


def create_sample_profile(pid="P1", **overrides) -> ProtectedProfile:
    fields = dict(participant_id=pid, gender="Male", race="Asian", ethnicity="Not Hispanic or Latino",
                  age=40, dementia="absent")
    fields.update(overrides)
    return ProtectedProfile(**fields)


def create_sample_day(pid="P1", day=date(2022, 3, 2), missing_fraction=0.0, seed=0) -> DayRecord:
    rng = np.random.default_rng(seed)
    hr = np.round(70 + rng.normal(0, 3, MINUTES), 1)
    steps = rng.poisson(3, MINUTES).astype(float)
    n_missing = int(round(missing_fraction * MINUTES))
    hr[rng.permutation(MINUTES)[:n_missing]] = np.nan
    return DayRecord(pid, day, hr, steps)


def create_sample_bundle(path: Path) -> Path:
    """Three participants of which only P1 passes the inclusion rule."""
    d1, d2 = date(2022, 3, 1), date(2022, 3, 10)
    profiles = {pid: create_sample_profile(pid) for pid in ("P1", "P2", "P3")}
    days = {
        ("P1", d2): create_sample_day("P1", d2),
        ("P2", d2): create_sample_day("P2", d2, missing_fraction=0.12),
        ("P3", d2): create_sample_day("P3", d2),
    }
    assessments = {
        "P1": [PainAssessment("P1", d1, 7), PainAssessment("P1", d2, 5)],
        "P2": [PainAssessment("P2", d1, 7), PainAssessment("P2", d2, 5)],
        "P3": [PainAssessment("P3", d2, 4)],
    }
    return write_bundle(Cohort(profiles, days, assessments), path)


def _assessments(scores, start=date(2022, 1, 1)):
    return [PainAssessment("P1", start + timedelta(days=7 * i), s) for i, s in enumerate(scores)]


def test_derive_labels_examples():
    a = _assessments([7, 5])
    assert derive_labels(a) == [(a[1].date, 1)]
    a = _assessments([4, 4])
    assert derive_labels(a) == [(a[1].date, 0)]
    a = _assessments([3, 6, 2])
    assert derive_labels(a) == [(a[1].date, 0), (a[2].date, 1)]
    assert derive_labels(_assessments([5])) == [], "a single assessment yields no label"


def test_derive_labels_order_equivariant():
    a = _assessments([3, 6, 2, 2, 8, 1])
    assert derive_labels(list(reversed(a))) == derive_labels(a)


def test_vas_range_enforced():
    with pytest.raises(CohortError):
        PainAssessment("P1", date(2022, 1, 1), 11)


def test_impute_examples():
    nan = np.nan
    assert impute([1, nan, 3], "linear").tolist() == [1, 2, 3]
    assert impute([2, nan, nan, 2], "mean").tolist() == [2, 2, 2, 2]
    assert impute([nan, 5, 5], "linear").tolist() == [5, 5, 5]
    with pytest.raises(ImputationError, match="channel empty"):
        impute([nan, nan], "linear")


def test_impute_keeps_present_values():
    rng = np.random.default_rng(1)
    series = rng.normal(size=200)
    series[rng.random(200) < 0.1] = np.nan
    present = ~np.isnan(series)
    for policy in ("mean", "linear"):
        filled = impute(series, policy)
        assert np.array_equal(filled[present], series[present]), f"{policy} changed present slots"
        assert not np.isnan(filled).any()


def test_minmax_examples():
    matrix = np.array([[0.0, 3.0], [5.0, 3.0], [10.0, 3.0]])
    scaled, ranges = minmax_normalize(matrix)
    assert scaled[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert scaled[:, 1].tolist() == [0.0, 0.0, 0.0], "constant columns map to 0"

    test = apply_minmax(np.array([[15.0, 4.0], [-5.0, 3.0]]), ranges)
    assert test[:, 0].tolist() == [1.0, 0.0], "out-of-range test values are clamped"


def test_minmax_inverse():
    rng = np.random.default_rng(2)
    matrix = rng.normal(size=(40, 6)) * 10
    scaled, ranges = minmax_normalize(matrix)
    assert scaled.min() >= 0.0 and scaled.max() <= 1.0
    assert np.allclose(inverse_minmax(scaled, ranges), matrix, atol=1e-12)


def test_privileged_flags():
    assert privileged_flag(create_sample_profile(), "gender") == 1
    assert privileged_flag(create_sample_profile(age=70), "age") == 0
    assert privileged_flag(create_sample_profile(dementia="present"), "dementia") == 0
    assert privileged_flag(create_sample_profile(ethnicity="Hispanic or Latino"), "ethnicity") == 0
    assert privileged_flag(create_sample_profile(race="White"), "race") == 0
    with pytest.raises(CohortError):
        privileged_flag(create_sample_profile(), "height")


def test_encode_demographics_one_hot():
    frame = encode_demographics([create_sample_profile("P1"), create_sample_profile("P2", gender="Female")])
    assert len(frame) == 2
    gender_columns = [c for c in frame.columns if c.startswith("gender")]
    assert len(gender_columns) == 2
    assert set(frame[gender_columns].sum(axis=1)) == {1}


def test_day_record_invariants():
    with pytest.raises(CohortError):
        DayRecord("P1", date(2022, 1, 1), np.ones(100), np.ones(100))
    with pytest.raises(CohortError):
        DayRecord("P1", date(2022, 1, 1), -np.ones(MINUTES), np.ones(MINUTES))


def test_raw_instances_have_2883_inputs():
    cohort = create_sample_cohort(n_participants=6)
    assert len(cohort) > 0
    assert cohort.matrix().shape[1] == 3 + 2 * MINUTES == 2883
    for inst in cohort.instances:
        prior = [a for a in cohort.assessments[inst.participant_id] if a.date < inst.date]
        assert prior, "instance without prior assessment"


def test_ingest_applies_inclusion_rule(tmp_path):
    bundle = create_sample_bundle(tmp_path / "bundle")
    cohort, results = CohortIngestionPipeline(EncodingPlan()).run(bundle)

    assert list(cohort.profiles) == ["P1"]
    assert results["exclusions"]["P3"] == "insufficient assessments"
    assert "missing" in results["exclusions"]["P2"]
    assert len(cohort) == 1 and cohort.labels().tolist() == [1]
    assert results["rows_read"] == {"participants": 3, "days": 3 * MINUTES, "assessments": 5}
    assert results["tables_clean"] == {"participants": True, "days": True, "assessments": True}


def test_ingest_rejects_malformed_rows(tmp_path):
    bundle = create_sample_bundle(tmp_path / "bundle")
    assessments = pd.read_csv(bundle / "assessments.csv")
    extra = pd.DataFrame([{"participant_id": "P1", "date": "not-a-date", "vas_score": 3},
                          {"participant_id": "P1", "date": "2022-05-01", "vas_score": 14}])
    pd.concat([assessments, extra]).to_csv(bundle / "assessments.csv", index=False)

    cohort, results = CohortIngestionPipeline().run(bundle)
    assert results["rows_rejected"] >= 2
    assert "assessments: malformed date" in results["rejections"]
    assert "assessments: vas_score out of range" in results["rejections"]
    assert results["rows_read"]["assessments"] == 7
    assert results["tables_clean"]["assessments"] is False
    assert results["tables_clean"]["participants"] is True
    assert list(cohort.profiles) == ["P1"]


def test_ingest_empty_cohort_is_fatal(tmp_path):
    d = date(2022, 3, 1)
    cohort = Cohort({"P1": create_sample_profile()}, {("P1", d): create_sample_day(day=d)},
                    {"P1": [PainAssessment("P1", d, 5)]})
    bundle = write_bundle(cohort, tmp_path / "bundle")
    with pytest.raises(EmptyCohortError):
        ingest_cohort(bundle)


def test_ingest_missing_column(tmp_path):
    bundle = create_sample_bundle(tmp_path / "bundle")
    pd.read_csv(bundle / "participants.csv").drop(columns=["race"]).to_csv(
        bundle / "participants.csv", index=False)
    with pytest.raises(CohortError, match="missing required columns"):
        ingest_cohort(bundle)


def test_validator_schema():
    validator = CohortValidator()
    ok, errors = validator.validate_schema(["participant_id", "date", "vas_score"], "assessments")
    assert ok and errors == []
    ok, errors = validator.validate_schema(["participant_id"], "assessments")
    assert not ok and "missing required columns" in errors[0]


def test_validator_full_check():
    validator = CohortValidator()
    frame = pd.DataFrame({"row_number": [1, 2, 3], "participant_id": ["P1", "P1", "P2"],
                          "date": ["2022-01-03", "2022-01-03", "2022-02-30"], "vas_score": [4.0, 5.0, 3.0]})
    ok, errors, warnings = validator.validate(frame, "assessments")
    assert not ok and errors == []
    assert "assessments.csv: 1 rows with duplicate assessment date" in warnings
    assert "assessments.csv: 1 rows with malformed date" in warnings

    ok, errors, warnings = validator.validate(frame.drop(columns=["vas_score"]), "assessments")
    assert not ok and errors and warnings == ["Skipped quality validation due to schema errors"]

    ok, _, warnings = validator.validate(frame.iloc[:0], "assessments")
    assert not ok and warnings == ["assessments.csv is empty"]


def test_bundle_round_trip(tmp_path):
    cohort = create_sample_cohort(n_participants=5)
    ingested = ingest_cohort(write_bundle(cohort, tmp_path / "bundle"))
    assert set(ingested.profiles) <= set(cohort.profiles)
    for key, record in ingested.days.items():
        original = cohort.days[key]
        assert np.allclose(record.heart_rate, original.heart_rate, equal_nan=True)
        assert np.allclose(record.steps, original.steps, equal_nan=True)


def test_cohort_json_round_trip(tmp_path):
    cohort = create_sample_cohort(n_participants=4)
    path = save_cohort(cohort, tmp_path / "cohort.json")
    restored = load_cohort(path)
    assert restored.participant_ids == cohort.participant_ids
    assert np.array_equal(restored.matrix(), cohort.matrix())
    assert np.array_equal(restored.labels(), cohort.labels())


def test_synthesis_is_deterministic(tmp_path):
    first = save_cohort(create_sample_cohort(n_participants=6, seed=3), tmp_path / "a.json")
    second = save_cohort(create_sample_cohort(n_participants=6, seed=3), tmp_path / "b.json")
    assert first.read_bytes() == second.read_bytes()


def test_synthesis_unbiased_cohort():
    cohort = create_sample_cohort(n_participants=100, seed=7)
    for attribute in settings.protected_attributes:
        spd_value, _ = dataset_bias(cohort.labels(), cohort.group(attribute))
        assert abs(spd_value) <= 0.15, f"{attribute} SPD {spd_value:.3f} on an unbiased cohort"


def test_synthesis_biased_cohort():
    cohort = create_sample_cohort(n_participants=200, bias={"gender": 0.4}, seed=7)
    _, di_value = dataset_bias(cohort.labels(), cohort.group("gender"))
    assert di_value < 0.8, f"gender DI {di_value:.3f} should fall under the 80% rule"


def test_synthesis_full_bias_strength():
    cohort = create_sample_cohort(n_participants=200, bias={"race": 1.0}, seed=5)
    _, di_value = dataset_bias(cohort.labels(), cohort.group("race"))
    assert di_value < 0.8, f"race DI {di_value:.3f} at strength 1.0"
    unprivileged = cohort.labels()[cohort.group("race") == 0]
    assert unprivileged.sum() == 0, "strength 1.0 removes recovery for the unprivileged group"


def test_synthesis_unbiased_disparate_impact_band():
    cohort = create_sample_cohort(n_participants=500, seed=7)
    for attribute in settings.protected_attributes:
        _, di_value = dataset_bias(cohort.labels(), cohort.group(attribute))
        assert 0.85 <= di_value <= 1.15, f"{attribute} DI {di_value:.3f} on an unbiased cohort"


def test_synthesis_long_histories_stay_on_the_vas_scale():
    for seed in range(5):
        config = SynthConfig(n_participants=20, min_assessments=15, max_assessments=15,
                             base_recovery_rate=1.0, seed=seed)
        cohort = synthesize_cohort(config)
        scores = [a.vas_score for history in cohort.assessments.values() for a in history]
        assert min(scores) == 0, "every participant walks down to the floor"
        assert max(scores) <= 10

        for history in cohort.assessments.values():
            labels = dict(derive_labels(history))
            pid = history[0].participant_id
            assert all((pid, day) in cohort.days for day in labels)
            floor_steps = [b for a, b in zip(history, history[1:]) if a.vas_score == 0]
            assert all(labels[b.date] == 0 for b in floor_steps), "no recovery below 0"


def test_group_partition_is_exhaustive():
    cohort = create_sample_cohort(n_participants=10)
    for attribute in settings.protected_attributes:
        assert set(np.unique(cohort.group(attribute))) <= {0, 1}
        assert cohort.group_matrix().shape == (len(cohort), len(settings.protected_attributes))


def test_split_by_participant():
    cohort = create_sample_cohort(n_participants=10)
    train, test = split(cohort, 0.8, seed=1)
    assert len(train.profiles) == 8 and len(test.profiles) == 2
    assert not set(train.participant_ids) & set(test.participant_ids)
    assert len(train) + len(test) == len(cohort)

    again, _ = split(cohort, 0.8, seed=1)
    assert again.participant_ids == train.participant_ids

    with pytest.raises(SplitError):
        split(cohort, 1.0, seed=1)


def test_with_weights_and_subset():
    cohort = create_sample_cohort(n_participants=6)
    weighted = cohort.with_weights(np.full(len(cohort), 2.0))
    assert np.all(weighted.weights() == 2.0)
    with pytest.raises(CohortError):
        cohort.with_weights([1.0])

    pid = cohort.participant_ids[0]
    assert cohort.subset([pid]).participant_ids == [pid]


def test_feature_mode_instances():
    cohort = create_sample_cohort(n_participants=4)
    plan = EncodingPlan(mode="features", domains=("statistical",), channels=("hr",))
    featured = build_instances(cohort, plan)
    assert len(featured) > 0
    assert featured.matrix().shape[1] == 16
    assert all(c.startswith("statistical.") for c in featured.vector_columns)
