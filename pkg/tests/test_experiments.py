"""
Tests for the experiment grid, result tables and the command-line interface
"""

import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

sys.path.append(str(Path(__file__).parent.parent))

from src.cli import main, parse_bias
from src.cohort import EncodingPlan, SynthConfig
from src.experiments import (
    BASELINE_MODELS, ExperimentEngine, ExperimentSpec, ResultTable, aggregate, cell_row, run_experiment
)
from src.fairness.metrics import IDEAL_VALUES, METRICS
from src.utils.errors import ResultIntegrityError, SpecError
from src.utils.logger import cell_logger
from src.utils.seeding import derive_seed


def create_sample_spec(tmp_path, **overrides) -> ExperimentSpec:
    """Baseline-only grid on a small synthetic cohort."""
    fields = dict(
        seed=3,
        synth=SynthConfig(n_participants=40, bias={"gender": 0.4}, seed=3),
        models=BASELINE_MODELS,
        mitigations=("reweighing", "dir", "roc"),
        repetitions=2,
        out_dir=str(tmp_path / "results"),
    )
    fields.update(overrides)
    return ExperimentSpec(**fields)


def _metrics(spd=0.0, di=1.0, eod=0.0, aod=0.0, theil=0.0):
    return {"spd": spd, "di": di, "eod": eod, "aod": aod, "theil": theil}


def test_spec_validation(tmp_path):
    with pytest.raises(ValidationError, match="exactly one data source"):
        ExperimentSpec(seed=1)
    with pytest.raises(ValidationError, match="exactly one data source"):
        ExperimentSpec(seed=1, bundle="data/bundle", synth=SynthConfig())
    with pytest.raises(ValidationError, match="at least one model"):
        create_sample_spec(tmp_path, models=())
    with pytest.raises(ValidationError, match="Unknown protected attributes"):
        create_sample_spec(tmp_path, attributes=("height",))
    with pytest.raises(ValidationError, match="raw-mode plan"):
        create_sample_spec(tmp_path, models=("mafl_cnn",), plan=EncodingPlan(mode="features"))
    with pytest.raises(SpecError):
        ExperimentSpec.from_json('{"seed": "x"}')


def test_spec_defaults_and_round_trip(tmp_path):
    spec = create_sample_spec(tmp_path, mitigations=("dir", "dir"))
    assert spec.mitigations == ("none", "dir"), "the unmitigated comparator is always present"
    assert ExperimentSpec.from_json(spec.to_json()) == spec

    cnn = create_sample_spec(tmp_path, models=("mafl_cnn", "bce_cnn"), attributes=("gender", "race"))
    config = cnn.train_config("mafl_cnn", "race", seed=5)
    assert config.loss_kind == "mafl" and config.attribute_set == ("race",) and config.seed == 5
    joint = cnn.model_copy(update={"mafl_attributes": "all"})
    assert joint.train_config("bce_cnn", "race", 5).attribute_set == ("gender", "race")


def test_derive_seed_is_stable():
    assert derive_seed(7, "train", 0, "gender") == derive_seed(7, "train", 0, "gender")
    assert derive_seed(7, "train", 0, "gender") != derive_seed(7, "train", 1, "gender")
    assert derive_seed(7, "split", 0) != derive_seed(8, "split", 0)
    assert 0 <= derive_seed(1, "x") < 2 ** 32


def test_cell_row_and_aggregate():
    first = cell_row(0, "gender", "none", "logistic", 0.8, _metrics(spd=0.05))
    second = cell_row(1, "gender", "none", "logistic", 0.6, _metrics(spd=0.25, di=math.inf))
    assert first["fair_count"] == 5 and first["stage"] == "pre"
    assert second["verdicts"]["spd"] == "favors_unprivileged"

    (row,) = aggregate([first, second])
    assert row["repetitions"] == 2 and row["failed"] == 0
    assert row["accuracy"] == pytest.approx(0.7)
    assert row["spd"] == pytest.approx(0.15)
    assert row["spd_std"] == pytest.approx(0.1), "population std over repetitions"
    assert row["di"] == math.inf and row["di_std"] is None
    assert row["verdicts"]["spd"] == "favors_unprivileged"

    failed = cell_row(2, "gender", "none", "logistic", None, None, error="degenerate group")
    (row,) = aggregate([first, failed])
    assert row["failed"] == 1
    assert row["spd"] == pytest.approx(0.05)
    assert failed["verdicts"] == {m: "undefined" for m in METRICS}


def test_ranking_and_winner_ties():
    cells = [
        cell_row(0, "gender", "none", "logistic", 0.70, _metrics()),
        cell_row(0, "gender", "dir", "logistic", 0.80, _metrics(spd=0.3)),
        cell_row(0, "gender", "none", "naive_bayes", 0.75, _metrics()),
        cell_row(0, "gender", "none", "decision_tree", 0.75, _metrics()),
    ]
    table = ResultTable(cells)
    ranking = table.ranking("gender")
    assert [(r["model"], r["mitigation"]) for r in ranking] == [
        ("naive_bayes", "none"), ("decision_tree", "none"), ("logistic", "none"), ("logistic", "dir")
    ], "fair count first, then accuracy, then insertion order"
    assert table.winners()["gender"]["model"] == "naive_bayes"
    assert "EXPERIMENT RESULTS" in table.summary()


def test_verify_detects_tampered_verdicts():
    table = ResultTable([cell_row(0, "gender", "none", "logistic", 0.8, _metrics(spd=0.3))])
    table.verify()

    tampered = ResultTable.from_json(table.to_json())
    tampered.cells[0]["verdicts"]["spd"] = "fair"
    with pytest.raises(ResultIntegrityError, match="verdict mismatch"):
        tampered.verify()

    recount = ResultTable.from_json(table.to_json())
    recount.rows[0]["fair_count"] = 5
    with pytest.raises(ResultIntegrityError, match="fair count"):
        recount.verify()


def test_plot_data_is_long_format():
    table = ResultTable([cell_row(0, "age", "roc", "logistic", 0.8, _metrics())])
    frame = table.plot_data()
    assert set(frame["metric"]) == {"accuracy"} | set(METRICS)
    assert set(frame["stage"]) == {"post"}


def test_baseline_grid_is_deterministic(tmp_path):
    spec = create_sample_spec(tmp_path)
    first = ExperimentEngine(spec).run()
    second = ExperimentEngine(spec).run()
    threaded = ExperimentEngine(spec.model_copy(update={"workers": 3})).run()

    assert first.table.to_json() == second.table.to_json()
    assert first.table.to_json() == threaded.table.to_json(), "worker count must not change results"

    cells = first.table.cells
    assert len(cells) == 2 * 1 * 4 * 3
    assert any(c["error"] is None for c in cells)
    assert {c["mitigation"] for c in cells} == {"none", "reweighing", "dir", "roc"}
    first.table.verify()

    bias = first.dataset_bias
    assert set(bias["stage"]) == {"original", "reweighing"}
    reweighed = bias[(bias["stage"] == "reweighing") & bias["spd"].notna()]
    assert np.all(np.abs(reweighed["spd"].astype(float)) < 1e-9)


def test_run_experiment_saves_outputs(tmp_path):
    spec = create_sample_spec(tmp_path, repetitions=1, mitigations=(), models=("logistic",))
    results = run_experiment(spec)
    out = Path(spec.out_dir)
    for name in ("results.json", "results.csv", "plot_data.csv", "dataset_bias.csv", "spec.json"):
        assert (out / name).exists(), name

    restored = ResultTable.from_json((out / "results.json").read_text())
    restored.verify()
    assert restored.to_json() == results.table.to_json()
    assert ExperimentSpec.load(out / "spec.json") == spec


def test_parse_bias():
    assert parse_bias("gender=0.4,race=0.2") == {"gender": 0.4, "race": 0.2}
    assert parse_bias("none") == {}
    with pytest.raises(SpecError):
        parse_bias("gender")
    with pytest.raises(SpecError):
        parse_bias("gender=strong")


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", "--n", "10"]) == 2, "seed is required"
    assert main(["run", "--seed", "1", "--models", "svm"]) == 2
    assert main(["run", "--seed", "1", "--bias", "gender"]) == 2
    assert main(["detect", "--bundle", str(tmp_path / "missing")]) == 3
    assert main(["report", "--out", str(tmp_path / "nothing")]) == 3
    assert "error:" in capsys.readouterr().err


def test_cli_synth_detect_run_report(tmp_path, capsys):
    bundle = tmp_path / "bundle"
    assert main(["synth", "--n", "30", "--bias", "gender=0.4", "--seed", "2", "--out", str(bundle)]) == 0
    assert "Dataset bias" in capsys.readouterr().out

    assert main(["detect", "--bundle", str(bundle), "--attribute", "gender",
                 "--out", str(tmp_path / "bias.json")]) == 0
    report = json.loads((tmp_path / "bias.json").read_text())
    assert list(report) == ["gender"]
    assert '"gender"' in capsys.readouterr().out

    out = tmp_path / "results"
    assert main(["run", "--bundle", str(bundle), "--seed", "4", "--models", "logistic,decision_tree",
                 "--mitigations", "reweighing", "--repetitions", "1", "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["report", "--out", str(out)]) == 0
    assert "EXPERIMENT RESULTS" in capsys.readouterr().out


def test_cli_config_file_with_overrides(tmp_path, capsys):
    spec = create_sample_spec(tmp_path, repetitions=1, mitigations=(), models=("naive_bayes",))
    config = tmp_path / "experiment.json"
    config.write_text(spec.to_json())
    out = tmp_path / "override"
    assert main(["run", "--config", str(config), "--seed", "9", "--out", str(out)]) == 0
    saved = ExperimentSpec.load(out / "spec.json")
    assert saved.seed == 9
    assert saved.models == ("naive_bayes",)
    assert saved.synth == spec.synth


def _median(cells, model, metric):
    values = [c[metric] for c in cells if c["model"] == model and c[metric] is not None]
    return float(np.median(values))


@pytest.mark.slow
def test_mafl_reduces_disparity_against_bce(tmp_path):
    spec = ExperimentSpec(
        seed=11,
        synth=SynthConfig(n_participants=400, bias={"gender": 0.4}, seed=11),
        models=("mafl_cnn", "bce_cnn"),
        repetitions=5,
        out_dir=str(tmp_path / "results"),
    )
    results = run_experiment(spec)
    cells = [c for c in results.table.cells if c["error"] is None]

    mafl_spd = abs(_median(cells, "mafl_cnn", "spd"))
    bce_spd = abs(_median(cells, "bce_cnn", "spd"))
    assert mafl_spd <= 0.5 * bce_spd, f"|SPD| {mafl_spd:.3f} vs {bce_spd:.3f}"
    assert _median(cells, "mafl_cnn", "accuracy") >= _median(cells, "bce_cnn", "accuracy") - 0.05

    improved = sum(
        abs(_median(cells, "mafl_cnn", m) - IDEAL_VALUES[m]) <= abs(_median(cells, "bce_cnn", m) - IDEAL_VALUES[m])
        for m in METRICS
    )
    assert improved >= 3


def test_cell_logger_prefixes_cell_keys(caplog):
    base = logging.getLogger("painfair.test_cells")
    base.propagate = True
    with caplog.at_level(logging.INFO, logger="painfair.test_cells"):
        cell_logger(base, 1, "race", "dir", "logistic").info("Cell start")
    assert "[rep=1 attribute=race mitigation=dir model=logistic] Cell start" in caplog.text
