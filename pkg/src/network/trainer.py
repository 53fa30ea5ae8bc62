"""
Mini-batch SGD training for the CNN

Each epoch shuffles the training fold, steps through mini-batches under the
configured loss, then scores the snapshot on a held-out validation fold.
The returned parameters are the epoch with the most fair metrics on that
fold, then the highest accuracy, then the earliest.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.cohort.models import Cohort
from src.config.settings import (
    settings, FAIRNESS_LAMBDA, REGULARIZATION_COEF, EPOCHS, LEARNING_RATE, BATCH_SIZE,
    DROPOUT_RATE, VALIDATION_FRACTION
)
from src.fairness.metrics import GroupedOutcomes, accuracy, report, spd
from src.network.losses import LossBreakdown, loss_and_gradient, masks_from_groups
from src.network.model import (
    NetworkParameters, NetworkShape, backward, forward, init_parameters, predict_classes
)
from src.utils.errors import PainFairError, TrainingDivergedError
from src.utils.logger import get_pipeline_logger, get_error_logger

logger = get_pipeline_logger()
error_logger = get_error_logger()


class TrainConfig(BaseModel):
    """Training hyper-parameters"""
    model_config = ConfigDict(frozen=True)

    fairness_lambda: float = Field(FAIRNESS_LAMBDA, ge=0.0)
    reg_coef: float = Field(REGULARIZATION_COEF, ge=0.0)
    epochs: int = Field(EPOCHS, ge=1)
    learning_rate: float = Field(LEARNING_RATE, gt=0.0)
    batch_size: int = Field(BATCH_SIZE, ge=1)
    dropout_rate: float = Field(DROPOUT_RATE, ge=0.0, lt=1.0)
    seed: int = 0
    loss_kind: Literal["bce", "mafl"] = "mafl"
    attribute_set: Tuple[str, ...] = settings.protected_attributes
    validation_fraction: float = Field(VALIDATION_FRACTION, ge=0.0, lt=1.0)

    @field_validator("attribute_set")
    @classmethod
    def _check_attributes(cls, value):
        if not value:
            raise ValueError("attribute_set must name at least one protected attribute")
        unknown = [a for a in value if a not in settings.protected_attributes]
        if unknown:
            raise ValueError(f"Unknown protected attributes: {unknown}")
        return tuple(value)


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Input matrix, labels, privileged indicators per attribute and instance weights"""
    x: np.ndarray
    labels: np.ndarray
    groups: Dict[str, np.ndarray]
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.labels)
        if n == 0:
            raise PainFairError("empty training set")
        if self.x.shape[0] != n:
            raise PainFairError(f"{self.x.shape[0]} input rows for {n} labels")
        weights = np.ones(n) if self.weights is None else np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_cohort(cls, cohort: Cohort, x: Optional[np.ndarray] = None) -> "TrainingSet":
        """``x`` overrides the cohort's input vectors (e.g. after min-max scaling)."""
        return cls(
            x=cohort.matrix() if x is None else x,
            labels=cohort.labels(),
            groups={a: cohort.group(a) for a in settings.protected_attributes},
            weights=cohort.weights(),
        )

    def __len__(self) -> int:
        return len(self.labels)

    def take(self, index: np.ndarray) -> "TrainingSet":
        return TrainingSet(self.x[index], self.labels[index],
                           {a: g[index] for a, g in self.groups.items()}, self.weights[index])


@dataclass
class TrainingHistory:
    """Per-epoch records and the selected epoch"""
    records: List[Dict] = field(default_factory=list)
    best_epoch: Optional[int] = None

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(self.records)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_dataframe().to_csv(path, index=False, lineterminator="\n")
        return path

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float)


def loss_and_gradients(params: NetworkParameters, batch: TrainingSet, config: TrainConfig,
                       rng: Optional[np.random.Generator] = None,
                       dropout_mask: Optional[np.ndarray] = None
                       ) -> Tuple[LossBreakdown, Dict[str, np.ndarray], Dict]:
    """Train-mode forward pass, configured loss and analytic gradients for one batch"""
    probs, cache = forward(params, batch.x, mode="train", dropout_rate=config.dropout_rate,
                           rng=rng, dropout_mask=dropout_mask)
    masks = masks_from_groups(batch.groups, config.attribute_set)
    breakdown, d_favorable = loss_and_gradient(
        config.loss_kind, batch.labels, probs[:, 1], masks,
        config.fairness_lambda, config.reg_coef, batch.weights
    )
    return breakdown, backward(params, cache, d_favorable), cache


def _validation_split(n: int, fraction: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    order = rng.permutation(n)
    n_val = int(round(fraction * n))
    if fraction == 0 or n_val == 0 or n - n_val < 1:
        return np.sort(order), np.sort(order)
    return np.sort(order[n_val:]), np.sort(order[:n_val])


def _fair_count(predictions: np.ndarray, data: TrainingSet, attributes: Sequence[str]) -> int:
    total = 0
    for attribute in attributes:
        outcomes = GroupedOutcomes(predictions, data.groups[attribute], data.labels, data.weights)
        total += report(outcomes).fair_count
    return total


def _spd_or_nan(predictions: np.ndarray, data: TrainingSet, attribute: str) -> float:
    try:
        return spd(GroupedOutcomes(predictions, data.groups[attribute], weights=data.weights))
    except PainFairError:
        return float("nan")


def train(train_set: TrainingSet, config: TrainConfig,
          shape: Optional[NetworkShape] = None,
          initial: Optional[NetworkParameters] = None) -> Tuple[NetworkParameters, TrainingHistory]:
    """
    Train the network with mini-batch SGD

    Args:
        train_set: Training data
        config: Hyper-parameters, loss kind and attribute set
        shape: Network shape (default: full network sized to the input width)
        initial: Starting parameters (default: He-initialized from ``config.seed``)

    Returns:
        (selected parameters, history)

    Raises:
        TrainingDivergedError: the loss or a gradient became non-finite
    """
    init_seq, split_seq, shuffle_seq, dropout_seq = np.random.SeedSequence(config.seed).spawn(4)
    shape = shape or NetworkShape(input_width=train_set.x.shape[1])
    params = initial or init_parameters(shape, rng=np.random.default_rng(init_seq))

    train_idx, val_idx = _validation_split(len(train_set), config.validation_fraction,
                                           np.random.default_rng(split_seq))
    fit_set, val_set = train_set.take(train_idx), train_set.take(val_idx)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    dropout_rng = np.random.default_rng(dropout_seq)
    primary = config.attribute_set[0]

    logger.info(
        f"Training {config.loss_kind} network: {len(fit_set)} train / {len(val_set)} validation "
        f"instances, {params.parameter_count()} parameters, {config.epochs} epochs"
    )

    history = TrainingHistory()
    best_key, best_params = None, params
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(len(fit_set))
        batches: List[LossBreakdown] = []
        for start in range(0, len(order), config.batch_size):
            batch = fit_set.take(order[start:start + config.batch_size])
            breakdown, grads, cache = loss_and_gradients(params, batch, config, rng=dropout_rng)
            if not np.isfinite(breakdown.total) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                diagnostics = {"epoch": epoch, "batch_start": start, **breakdown.to_dict()}
                error_logger.error(f"Training diverged: {diagnostics}")
                raise TrainingDivergedError("non-finite loss or gradient", diagnostics)
            updates = {name: params[name] - config.learning_rate * grads[name] for name in grads}
            params = params.replace(**updates, **cache["running"])
            batches.append(breakdown)

        fit_pred = predict_classes(params, fit_set.x)
        val_pred = predict_classes(params, val_set.x)
        record = {
            "epoch": epoch,
            "loss": float(np.mean([b.total for b in batches])),
            "bce": float(np.mean([b.bce for b in batches])),
            "disparity": float(np.mean([b.disparity for b in batches])),
            "dispersion": float(np.mean([b.dispersion for b in batches])),
            "accuracy": accuracy(fit_pred, fit_set.labels, fit_set.weights),
            "spd": _spd_or_nan(fit_pred, fit_set, primary),
            "val_accuracy": accuracy(val_pred, val_set.labels, val_set.weights),
            "val_fair_count": _fair_count(val_pred, val_set, config.attribute_set),
            "skipped_terms": int(sum(len(b.skipped_attributes) for b in batches)),
        }
        history.records.append(record)
        logger.info(
            f"Epoch {epoch}/{config.epochs}: loss={record['loss']:.5f} acc={record['accuracy']:.4f} "
            f"spd[{primary}]={record['spd']:.4f} val_fair={record['val_fair_count']} "
            f"skipped_terms={record['skipped_terms']}"
        )

        key = (record["val_fair_count"], record["val_accuracy"])
        if best_key is None or key > best_key:
            best_key, best_params, history.best_epoch = key, params, epoch

    logger.info(f"Selected epoch {history.best_epoch} (fair metrics, validation accuracy) = {best_key}")
    return best_params, history
