"""Central-difference verification of the analytic network gradients"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from src.config.settings import settings
from src.network.model import NetworkParameters, activation_pattern, forward
from src.network.layers import dropout_mask as make_dropout_mask
from src.network.losses import loss_and_gradient, masks_from_groups
from src.network.trainer import TrainConfig, TrainingSet, loss_and_gradients

# Conv biases feed straight into batch-norm, which subtracts them back out:
# their true gradient is identically zero and only rounding noise remains.
BN_ABSORBED = ("conv1_b", "conv2_b")


@dataclass
class GradCheckResult:
    max_relative_error: float
    per_parameter: Dict[str, float] = field(default_factory=dict)
    checked: int = 0
    skipped: int = 0


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))


def _loss(params: NetworkParameters, batch: TrainingSet, config: TrainConfig,
          mask: Optional[np.ndarray]) -> Tuple[float, Tuple]:
    probs, cache = forward(params, batch.x, mode="train", dropout_mask=mask)
    p = probs[:, 1]
    masks = masks_from_groups(batch.groups, config.attribute_set)
    breakdown, _ = loss_and_gradient(config.loss_kind, batch.labels, p, masks,
                                     config.fairness_lambda, config.reg_coef, batch.weights)
    # dispersion and clipping kinks join the activation pattern
    eps = settings.probability_clip
    kinks = (np.sign(p - p.mean()).tobytes(), ((p < eps) | (p > 1 - eps)).tobytes())
    return breakdown.total, activation_pattern(cache) + kinks


def grad_check(params: NetworkParameters, batch: TrainingSet, config: TrainConfig,
               h: float = 1e-5, seed: int = 0) -> GradCheckResult:
    """
    Compare analytic gradients with central differences, entry by entry

    The dropout mask is drawn once and held fixed. Entries whose
    perturbation moves the network across a ReLU, max-pool or |.| kink are
    skipped, as are the batch-norm-absorbed conv biases.

    Returns:
        GradCheckResult with the max of |a - n| / max(1e-8, |a| + |n|)
    """
    mask = None
    if config.dropout_rate > 0:
        hidden = (len(batch), params.shape.hidden)
        mask = make_dropout_mask(hidden, config.dropout_rate, np.random.default_rng(seed))

    _, analytic, _ = loss_and_gradients(params, batch, config, dropout_mask=mask)
    _, base_pattern = _loss(params, batch, config, mask)

    result = GradCheckResult(max_relative_error=0.0)
    for name in params.trainable:
        if name in BN_ABSORBED:
            continue
        worst = 0.0
        base = np.array(params[name])
        for index in np.ndindex(base.shape):
            plus, minus = base.copy(), base.copy()
            plus[index] += h
            minus[index] -= h
            f_plus, pattern_plus = _loss(params.replace(**{name: plus}), batch, config, mask)
            f_minus, pattern_minus = _loss(params.replace(**{name: minus}), batch, config, mask)
            if pattern_plus != base_pattern or pattern_minus != base_pattern:
                result.skipped += 1
                continue
            numeric = (f_plus - f_minus) / (2.0 * h)
            worst = max(worst, relative_error(float(analytic[name][index]), numeric))
            result.checked += 1
        result.per_parameter[name] = worst
        result.max_relative_error = max(result.max_relative_error, worst)
    return result
