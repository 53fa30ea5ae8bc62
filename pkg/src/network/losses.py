"""
Binary cross-entropy and the multi-attribute fairness loss

    loss = BCE(y, p)
         + lambda * sum_k (mean(p | privileged_k) - mean(p | unprivileged_k))^2
         + reg_coef * sum_i |p_i - mean(p)|

p is the favorable-class probability. An attribute whose mask holds only one
group within the batch contributes no disparity term for that batch.
"""
from dataclasses import dataclass, asdict, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.config.settings import settings, FAIRNESS_LAMBDA, REGULARIZATION_COEF
from src.utils.errors import PainFairError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()


@dataclass(frozen=True)
class LossBreakdown:
    """Loss addends for one batch"""
    bce: float
    disparity: float = 0.0
    dispersion: float = 0.0
    skipped_attributes: Tuple[str, ...] = field(default=())

    @property
    def total(self) -> float:
        return self.bce + self.disparity + self.dispersion

    def to_dict(self) -> Dict:
        payload = asdict(self)
        payload["total"] = self.total
        return payload


def _check_inputs(y_true, y_pred, weights=None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    y = np.asarray(y_true, dtype=float).ravel()
    p = np.asarray(y_pred, dtype=float).ravel()
    if p.size == 0:
        raise PainFairError("loss of an empty batch")
    if y.size != p.size:
        raise PainFairError(f"{y.size} labels for {p.size} predictions")
    w = np.ones(p.size) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.size != p.size:
        raise PainFairError(f"{w.size} weights for {p.size} predictions")
    return y, p, w


def bce_loss(y_true, y_pred, weights=None) -> float:
    """Weighted mean of -[y ln p + (1 - y) ln(1 - p)], p clipped to [eps, 1 - eps]"""
    y, p, w = _check_inputs(y_true, y_pred, weights)
    eps = settings.probability_clip
    pc = np.clip(p, eps, 1.0 - eps)
    per_instance = -(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))
    return float(np.sum(w * per_instance) / np.sum(w))


def bce_gradient(y_true, y_pred, weights=None) -> np.ndarray:
    y, p, w = _check_inputs(y_true, y_pred, weights)
    eps = settings.probability_clip
    inside = (p >= eps) & (p <= 1.0 - eps)
    pc = np.clip(p, eps, 1.0 - eps)
    grad = (w / np.sum(w)) * (-y / pc + (1.0 - y) / (1.0 - pc))
    return np.where(inside, grad, 0.0)


def _group_gaps(p: np.ndarray, group_masks: Dict[str, np.ndarray]):
    """Yield (attribute, privileged mask, gap) for attributes with both groups present."""
    for attribute, mask in group_masks.items():
        mask = np.asarray(mask).ravel().astype(bool)
        if mask.size != p.size:
            raise PainFairError(f"group mask '{attribute}' has {mask.size} entries for {p.size} predictions")
        if mask.all() or not mask.any():
            yield attribute, mask, None
            continue
        yield attribute, mask, float(p[mask].mean() - p[~mask].mean())


def mafl_loss(y_true, y_pred, group_masks: Dict[str, np.ndarray],
              fairness_lambda: float = FAIRNESS_LAMBDA, reg_coef: float = REGULARIZATION_COEF,
              weights=None) -> LossBreakdown:
    """
    Multi-attribute fairness loss with its three addends

    Args:
        y_true: Binary labels
        y_pred: Favorable-class probabilities
        group_masks: attribute -> privileged indicator (1 = privileged)
        fairness_lambda: Weight of the summed squared group gaps
        reg_coef: Weight of the absolute-deviation dispersion term
        weights: Optional instance weights for the BCE addend

    Returns:
        LossBreakdown; ``total`` is the loss
    """
    y, p, w = _check_inputs(y_true, y_pred, weights)
    bce = bce_loss(y, p, w)

    disparity, skipped = 0.0, []
    for attribute, _, gap in _group_gaps(p, group_masks):
        if gap is None:
            skipped.append(attribute)
            logger.debug(f"Disparity term for '{attribute}' skipped: one group absent from batch")
            continue
        disparity += gap ** 2
    disparity *= fairness_lambda

    dispersion = reg_coef * float(np.sum(np.abs(p - p.mean())))
    return LossBreakdown(bce=bce, disparity=disparity, dispersion=dispersion,
                         skipped_attributes=tuple(skipped))


def mafl_gradient(y_true, y_pred, group_masks: Dict[str, np.ndarray],
                  fairness_lambda: float = FAIRNESS_LAMBDA, reg_coef: float = REGULARIZATION_COEF,
                  weights=None) -> np.ndarray:
    """dLoss/dp; the subgradient of |.| at 0 is 0."""
    y, p, w = _check_inputs(y_true, y_pred, weights)
    grad = bce_gradient(y, p, w)

    for _, mask, gap in _group_gaps(p, group_masks):
        if gap is None:
            continue
        share = np.where(mask, 1.0 / mask.sum(), -1.0 / (~mask).sum())
        grad += 2.0 * fairness_lambda * gap * share

    signs = np.sign(p - p.mean())
    grad += reg_coef * (signs - signs.mean())
    return grad


def loss_and_gradient(loss_kind: str, y_true, y_pred, group_masks: Optional[Dict] = None,
                      fairness_lambda: float = FAIRNESS_LAMBDA, reg_coef: float = REGULARIZATION_COEF,
                      weights=None) -> Tuple[LossBreakdown, np.ndarray]:
    if loss_kind == "bce":
        return LossBreakdown(bce=bce_loss(y_true, y_pred, weights)), bce_gradient(y_true, y_pred, weights)
    if loss_kind == "mafl":
        masks = group_masks or {}
        return (
            mafl_loss(y_true, y_pred, masks, fairness_lambda, reg_coef, weights),
            mafl_gradient(y_true, y_pred, masks, fairness_lambda, reg_coef, weights),
        )
    raise PainFairError(f"Unknown loss kind '{loss_kind}'. Choose from ('bce', 'mafl')")


def masks_from_groups(groups: Dict[str, np.ndarray], attributes: Sequence[str]) -> Dict[str, np.ndarray]:
    return {attribute: np.asarray(groups[attribute]) for attribute in attributes}
