"""
Tests for the bias mitigators
"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent.parent))

from src.fairness import GroupedOutcomes, dataset_bias, disparate_impact, spd
from src.mitigation import (
    DisparateImpactRemover, RejectOptionClassifier, RepairPlan, Reweighing, ReweighingTable,
    dir_repair, fit_repair, reweigh, roc_adjust
)
from src.utils.errors import DegenerateGroupError, PainFairError


def create_sample_labels():
    """Unprivileged: 4 instances, 1 positive. Privileged: 6 instances, 5 positive."""
    group = np.array([0, 0, 0, 0, 1, 1, 1, 1, 1, 1])
    labels = np.array([1, 0, 0, 0, 1, 1, 1, 1, 1, 0])
    return labels, group


def test_reweighing_closed_form():
    labels, group = create_sample_labels()
    table, weights = reweigh(labels, group)

    assert table.weight_for(0, 1) == pytest.approx(2.4)
    assert table.weight_for(1, 1) == pytest.approx(0.72)
    assert table.weight_for(0, 0) == pytest.approx(0.5333, abs=1e-4)
    assert table.weight_for(1, 0) == pytest.approx(2.4)
    assert weights.sum() == pytest.approx(10.0, abs=1e-9), "total weight should stay n"

    g = GroupedOutcomes(labels, group, weights=weights)
    assert g.rate(0) == pytest.approx(0.6)
    assert g.rate(1) == pytest.approx(0.6)


def test_reweighing_independent_labels_all_ones():
    labels = np.array([1, 0, 1, 0])
    group = np.array([0, 0, 1, 1])
    _, weights = reweigh(labels, group)
    assert np.allclose(weights, 1.0)


def test_reweighing_empty_cell_gets_unit_weight():
    labels = np.array([0, 0, 1, 0])
    group = np.array([0, 0, 1, 1])
    table, _ = reweigh(labels, group)
    assert (0, 1) in table.empty_cells
    assert table.weight_for(0, 1) == 1.0


def test_reweighing_needs_both_groups():
    with pytest.raises(DegenerateGroupError):
        reweigh(np.array([1, 0]), np.array([1, 1]))


def test_reweighing_nullifies_dataset_bias():
    """Weighted label SPD is 0 on random cohorts with all four cells populated."""
    rng = np.random.default_rng(21)
    checked = 0
    while checked < 50:
        n = int(rng.integers(20, 300))
        group = rng.integers(0, 2, n)
        labels = (rng.random(n) < np.where(group == 1, 0.7, 0.35)).astype(int)
        if any(np.sum((group == g) & (labels == l)) == 0 for g in (0, 1) for l in (0, 1)):
            continue
        _, weights = reweigh(labels, group)
        weighted_spd, _ = dataset_bias(labels, group, weights)
        assert abs(weighted_spd) < 1e-12, f"weighted SPD {weighted_spd} on cohort of {n}"
        assert weights.sum() == pytest.approx(n, abs=1e-9)
        checked += 1


def test_reweighing_table_round_trip(tmp_path):
    labels, group = create_sample_labels()
    table, _ = reweigh(labels, group)
    path = table.save(tmp_path / "weights.json")
    restored = ReweighingTable.from_dict(json.loads(path.read_text()))
    assert restored.weights == pytest.approx(table.weights)
    assert restored.counts == table.counts


def test_reweighing_mitigator_on_cohort():
    from tests.test_cohort import create_sample_cohort

    cohort = create_sample_cohort(n_participants=12, bias={"gender": 0.5})
    mitigator = Reweighing(attribute="gender")
    reweighed = mitigator.fit_transform(cohort)

    assert len(reweighed) == len(cohort)
    weighted_spd, _ = dataset_bias(reweighed.labels(), reweighed.group("gender"), reweighed.weights())
    cells_present = all(np.any((reweighed.group("gender") == g) & (reweighed.labels() == l))
                        for g in (0, 1) for l in (0, 1))
    if cells_present:
        assert abs(weighted_spd) < 1e-12
    assert mitigator.get_parameter_info()["parameters"] == {"attribute": "gender"}

    with pytest.raises(ValueError):
        Reweighing(attribute="height")


def test_dir_example():
    matrix = np.array([[1.0], [2.0], [3.0], [4.0], [5.0], [6.0]])
    group = np.array([0, 0, 0, 1, 1, 1])
    repaired = dir_repair(matrix, group, repair_level=1.0)
    assert np.allclose(repaired[:3, 0], [2.5, 3.5, 4.5])
    assert np.allclose(repaired[3:, 0], [2.5, 3.5, 4.5])


def test_dir_level_zero_is_identity():
    rng = np.random.default_rng(2)
    matrix = rng.normal(size=(30, 4))
    group = rng.integers(0, 2, 30)
    assert np.array_equal(dir_repair(matrix, group, repair_level=0.0), matrix)


def test_dir_equalizes_quantile_functions():
    rng = np.random.default_rng(8)
    group = np.r_[np.zeros(50, int), np.ones(50, int)]
    column = np.where(group == 1, rng.normal(5.0, 2.0, 100), rng.normal(0.0, 1.0, 100))
    repaired = dir_repair(column[:, None], group)[:, 0]
    assert np.allclose(np.sort(repaired[group == 0]), np.sort(repaired[group == 1]), atol=1e-9)


def test_dir_preserves_within_group_order_and_interpolates():
    rng = np.random.default_rng(9)
    matrix = rng.exponential(size=(80, 3))
    group = rng.integers(0, 2, 80)
    full = dir_repair(matrix, group, 1.0)
    half = dir_repair(matrix, group, 0.5)

    for g in (0, 1):
        for j in range(3):
            original, repaired = matrix[group == g, j], full[group == g, j]
            order = np.argsort(original, kind="stable")
            assert np.all(np.diff(repaired[order]) >= -1e-12), "within-group order changed"

    low, high = np.minimum(matrix, full), np.maximum(matrix, full)
    assert np.all(half >= low - 1e-12) and np.all(half <= high + 1e-12)


def test_dir_single_valued_group_passes_through():
    matrix = np.array([[7.0], [7.0], [1.0], [3.0]])
    group = np.array([0, 0, 1, 1])
    repaired = dir_repair(matrix, group)
    assert np.array_equal(repaired[:2, 0], [7.0, 7.0])


def test_dir_threshold_classifier_reaches_parity():
    rng = np.random.default_rng(13)
    group = rng.integers(0, 2, 500)
    feature = rng.normal(np.where(group == 1, 1.0, -1.0), 1.0)
    repaired = dir_repair(feature[:, None], group)[:, 0]
    predictions = (repaired > np.median(repaired)).astype(int)
    di = disparate_impact(GroupedOutcomes(predictions, group))
    assert 0.95 <= di <= 1.05, f"DI after repair {di:.3f}"


def test_dir_fitted_plan_transforms_held_out_rows(tmp_path):
    rng = np.random.default_rng(4)
    train, test = rng.normal(size=(60, 2)), rng.normal(size=(20, 2))
    g_train, g_test = rng.integers(0, 2, 60), rng.integers(0, 2, 20)

    remover = DisparateImpactRemover(repair_level=1.0)
    remover.fit(train, g_train)
    out = remover.transform(test, g_test)
    assert out.shape == test.shape

    path = remover.plan.save(tmp_path / "plan.json")
    restored = RepairPlan.from_dict(json.loads(path.read_text()))
    assert np.allclose(restored.transform(test, g_test), out)

    with pytest.raises(PainFairError):
        fit_repair(train, g_train, repair_level=1.5)
    with pytest.raises(PainFairError, match="fitted"):
        DisparateImpactRemover().transform(test, g_test)


def test_roc_examples():
    scores = np.array([0.45, 0.55])
    group = np.array([0, 1])
    assert roc_adjust(scores, group, 0.5, 0.1).tolist() == [1, 0]
    assert roc_adjust(scores, group, 0.5, 0.0).tolist() == [0, 1], "margin 0 is plain thresholding"

    outside = np.array([0.1, 0.9, 0.2, 0.8])
    assert roc_adjust(outside, np.array([0, 0, 1, 1]), 0.5, 0.1).tolist() == [0, 1, 0, 1]


def test_roc_rejects_bad_margin():
    with pytest.raises(PainFairError):
        roc_adjust(np.array([0.5]), np.array([0]), 0.5, 0.5)
    with pytest.raises(PainFairError):
        roc_adjust(np.array([0.5]), np.array([0]), 1.0, 0.1)


def test_roc_monotone_in_margin():
    rng = np.random.default_rng(17)
    scores, group = rng.random(300), rng.integers(0, 2, 300)
    base = (scores > 0.5).astype(int)
    previous = np.zeros(300, dtype=bool)
    for margin in np.linspace(0.0, 0.45, 10):
        flipped = roc_adjust(scores, group, 0.5, margin) != base
        assert np.all(flipped[previous]), "a smaller margin flipped something a larger one kept"
        previous = flipped


def test_roc_classifier_margin_search():
    rng = np.random.default_rng(6)
    group = rng.integers(0, 2, 400)
    labels = (rng.random(400) < np.where(group == 1, 0.7, 0.4)).astype(int)
    scores = np.clip(0.5 + 0.3 * (labels - 0.5) + 0.1 * (group - 0.5) + rng.normal(0, 0.1, 400), 0, 1)

    roc = RejectOptionClassifier(threshold=0.5, max_accuracy_drop=0.05)
    roc.fit(scores, labels, group)
    chosen = roc.parameters["margin"]
    assert chosen in roc.search
    baseline = roc.search[0.0]
    assert roc.search[chosen]["accuracy"] >= baseline["accuracy"] - 0.05
    assert roc.search[chosen]["abs_spd"] <= baseline["abs_spd"]

    predictions = roc.predict(scores, group)
    assert abs(spd(GroupedOutcomes(predictions, group))) == pytest.approx(roc.search[chosen]["abs_spd"])


def test_group_vectors_are_checked():
    with pytest.raises(PainFairError, match="group entries"):
        reweigh(np.array([0, 1, 1]), np.array([0, 1]))
    with pytest.raises(PainFairError, match="binary privileged indicator"):
        roc_adjust(np.array([0.2, 0.7]), np.array([0, 2]))
    with pytest.raises(PainFairError, match="group entries"):
        dir_repair(np.ones((3, 2)), np.array([0, 1]))


def test_mitigators_report_fitted_state():
    labels, group = create_sample_labels()
    roc = RejectOptionClassifier()
    assert not roc.is_fitted
    roc.fit(np.linspace(0.05, 0.95, labels.size), labels, group)
    assert roc.is_fitted
    assert roc.get_parameter_info()["stage"] == "post"
    assert "stage=post" in repr(roc)
