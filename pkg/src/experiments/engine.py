"""
Experiment Engine

Orchestrates the fairness-vs-accuracy grid:
1. Load or synthesize the cohort and encode it for CNN and baseline models
2. Split participants per repetition and record dataset-level label bias
3. Apply each mitigation, train each model, score the test partition
4. Aggregate repetitions into a ResultTable

Every cell is seeded from (spec seed, cell keys) alone, so running cells
concurrently never changes results.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.baselines import BASELINES
from src.cohort.instances import build_instances
from src.cohort.models import Cohort
from src.cohort.pipeline import ingest_cohort
from src.cohort.preprocessing import apply_minmax, minmax_normalize
from src.cohort.splitting import split
from src.cohort.synthetic import synthesize_cohort
from src.experiments.results import ExperimentResults, ResultTable, cell_row
from src.experiments.spec import CNN_MODELS, ExperimentSpec
from src.fairness.metrics import GroupedOutcomes, accuracy, dataset_bias, report
from src.mitigation import DisparateImpactRemover, RejectOptionClassifier, reweigh
from src.network.model import predict_proba as network_proba
from src.network.trainer import TrainingSet, train
from src.utils.errors import PainFairError
from src.utils.logger import cell_logger, get_error_logger, get_pipeline_logger
from src.utils.seeding import derive_seed

logger = get_pipeline_logger()
error_logger = get_error_logger()


@dataclass(frozen=True, eq=False)
class Partition:
    """Min-max scaled train/test inputs of one encoding for one repetition"""
    train: Cohort
    test: Cohort
    x_train: np.ndarray
    x_test: np.ndarray


def _partition(train_cohort: Cohort, test_cohort: Cohort) -> Partition:
    if len(train_cohort) == 0 or len(test_cohort) == 0:
        raise PainFairError("a partition has no instances under this encoding")
    x_train, ranges = minmax_normalize(train_cohort.matrix())
    return Partition(train_cohort, test_cohort, x_train, apply_minmax(test_cohort.matrix(), ranges))


class ExperimentEngine:
    """
    Runs an ExperimentSpec.

    Features:
    - Cohort from a CSV bundle or the synthetic generator
    - Reweighing, disparate impact repair and reject option comparators
    - MAFL/BCE CNNs and weighted baseline classifiers
    - Mean and std over seed-varied repetitions
    """

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.results: Optional[ExperimentResults] = None

    def load_cohorts(self) -> Dict[str, Cohort]:
        """The cohort encoded once per model family ("cnn", "baseline") actually requested."""
        spec = self.spec
        if spec.bundle is not None:
            base = ingest_cohort(spec.bundle, spec.plan)
        else:
            base = synthesize_cohort(spec.synth, spec.plan)

        cohorts = {}
        if any(m in CNN_MODELS for m in spec.models):
            cohorts["cnn"] = base
        if any(m not in CNN_MODELS for m in spec.models):
            cohorts["baseline"] = build_instances(base, spec.baseline_plan)
        return cohorts

    def run(self) -> ExperimentResults:
        spec = self.spec
        start = time.time()
        logger.info("=" * 50)
        logger.info(
            f"Experiment: models={list(spec.models)} mitigations={list(spec.mitigations)} "
            f"attributes={list(spec.attributes)} repetitions={spec.repetitions} seed={spec.seed}"
        )
        cohorts = self.load_cohorts()

        cells, bias_rows = [], []
        for repetition in range(spec.repetitions):
            split_seed = derive_seed(spec.seed, "split", repetition)
            any_cohort = next(iter(cohorts.values()))
            train_base, test_base = split(any_cohort, spec.split_ratio, split_seed)
            train_ids, test_ids = train_base.participant_ids, test_base.participant_ids

            partitions: Dict[str, Partition] = {}
            family_errors: Dict[str, str] = {}
            for family, cohort in cohorts.items():
                try:
                    partitions[family] = _partition(cohort.subset(train_ids), cohort.subset(test_ids))
                except PainFairError as e:
                    family_errors[family] = str(e)
                    error_logger.error(f"Repetition {repetition} {family} inputs unavailable: {e}")

            bias_source = partitions.get("cnn") or partitions.get("baseline")
            if bias_source is not None:
                bias_rows += self._dataset_bias(repetition, bias_source)

            grid = [(repetition, attribute, mitigation, model)
                    for attribute in spec.attributes
                    for mitigation in spec.mitigations
                    for model in spec.models]

            def run_cell(cell: Tuple[int, str, str, str]) -> Dict:
                family = "cnn" if cell[3] in CNN_MODELS else "baseline"
                if family in family_errors:
                    return cell_row(*cell, accuracy=None, metrics=None, error=family_errors[family])
                return self._run_cell(*cell, partitions[family])

            if spec.workers > 1:
                with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                    cells += list(pool.map(run_cell, grid))
            else:
                cells += [run_cell(cell) for cell in grid]

        table = ResultTable(cells)
        table.verify()
        self.results = ExperimentResults(spec, table, pd.DataFrame(bias_rows))

        failed = sum(1 for c in cells if c["error"])
        logger.info("=" * 50)
        logger.info("Experiment Summary:")
        logger.info(f"  Cells run: {len(cells)}")
        logger.info(f"  Cells failed: {failed}")
        logger.info(f"  Duration: {time.time() - start:.2f} seconds")
        logger.info("=" * 50)
        return self.results

    def _dataset_bias(self, repetition: int, partition: Partition) -> List[Dict]:
        rows = []
        for attribute in self.spec.attributes:
            for name, cohort in (("train", partition.train), ("test", partition.test)):
                labels, group = cohort.labels(), cohort.group(attribute)
                stages = [("original", None)]
                if "reweighing" in self.spec.mitigations:
                    try:
                        stages.append(("reweighing", reweigh(labels, group)[1]))
                    except PainFairError as e:
                        logger.warning(f"No reweighing bias row for {attribute}/{name}: {e}")
                for stage, weights in stages:
                    try:
                        spd_value, di_value = dataset_bias(labels, group, weights)
                    except PainFairError as e:
                        logger.warning(f"Dataset bias undefined for {attribute}/{name}: {e}")
                        spd_value, di_value = None, None
                    rows.append({"repetition": repetition, "attribute": attribute, "partition": name,
                                 "stage": stage, "spd": spd_value, "di": di_value,
                                 "instances": len(labels)})
        return rows

    def _run_cell(self, repetition: int, attribute: str, mitigation: str, model: str,
                  partition: Partition) -> Dict:
        spec = self.spec
        log = cell_logger(logger, repetition, attribute, mitigation, model)
        log.info("Cell start")
        try:
            train_c, test_c = partition.train, partition.test
            x_train, x_test = partition.x_train, partition.x_test
            y_train, g_train = train_c.labels(), train_c.group(attribute)
            weights = train_c.weights()

            if mitigation == "reweighing":
                _, weights = reweigh(y_train, g_train)
            elif mitigation == "dir":
                remover = DisparateImpactRemover(repair_level=spec.dir_repair_level, attribute=attribute)
                x_train = remover.fit_transform(x_train, g_train)
                x_test = remover.transform(x_test, test_c.group(attribute))

            # reject option post-processes the unmitigated model, so it shares that model's seed
            trained_as = "none" if mitigation == "roc" else mitigation
            seed = derive_seed(spec.seed, "train", repetition, attribute, trained_as, model)
            train_scores, test_scores = self._fit_scores(model, attribute, seed, train_c, x_train,
                                                         x_test, weights)

            if mitigation == "roc":
                roc = RejectOptionClassifier(threshold=spec.roc_threshold, margin=spec.roc_margin)
                roc.fit(train_scores, y_train, g_train)
                predictions = roc.predict(test_scores, test_c.group(attribute))
            else:
                predictions = (test_scores > 0.5).astype(int)

            y_test = test_c.labels()
            result = report(GroupedOutcomes(predictions, test_c.group(attribute), y_test))
            metrics = {m: result.value(m) for m in ("spd", "di", "eod", "aod", "theil")}
            log.info(f"Cell done: fair {result.fair_count}/5")
            return cell_row(repetition, attribute, mitigation, model, accuracy(predictions, y_test),
                            metrics, n_train=len(y_train), n_test=len(y_test))
        except PainFairError as e:
            cell_logger(error_logger, repetition, attribute, mitigation, model).error(
                f"Cell failed: {e}", exc_info=True
            )
            return cell_row(repetition, attribute, mitigation, model, accuracy=None, metrics=None,
                            error=str(e))

    def _fit_scores(self, model: str, attribute: str, seed: int, train_c: Cohort,
                    x_train: np.ndarray, x_test: np.ndarray, weights: np.ndarray):
        """Favorable-class scores on the train and test inputs."""
        if model in CNN_MODELS:
            config = self.spec.train_config(model, attribute, seed)
            data = TrainingSet.from_cohort(train_c, x=x_train)
            data = TrainingSet(data.x, data.labels, data.groups, weights)
            params, _ = train(data, config)
            return network_proba(params, x_train)[:, 1], network_proba(params, x_test)[:, 1]
        classifier = BASELINES[model]().fit(x_train, train_c.labels(), weights)
        return classifier.predict_proba(x_train), classifier.predict_proba(x_test)


def run_experiment(spec: ExperimentSpec, save: bool = True) -> ExperimentResults:
    results = ExperimentEngine(spec).run()
    if save:
        paths = results.save()
        logger.info(f"Results written to {paths['results'].parent}")
    return results
