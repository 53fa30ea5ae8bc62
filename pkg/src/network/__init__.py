"""
Network Module

Numpy 1-D CNN with batch-norm and dropout, binary cross-entropy and the
multi-attribute fairness loss, SGD training and gradient checking.
"""

from .model import (
    NetworkShape, NetworkParameters, Prediction, init_parameters, forward, backward,
    predict, predict_proba, predict_classes
)
from .losses import LossBreakdown, bce_loss, mafl_loss, bce_gradient, mafl_gradient
from .trainer import TrainConfig, TrainingSet, TrainingHistory, train, loss_and_gradients
from .gradcheck import GradCheckResult, grad_check

__all__ = [
    'NetworkShape',
    'NetworkParameters',
    'Prediction',
    'init_parameters',
    'forward',
    'backward',
    'predict',
    'predict_proba',
    'predict_classes',
    'LossBreakdown',
    'bce_loss',
    'mafl_loss',
    'bce_gradient',
    'mafl_gradient',
    'TrainConfig',
    'TrainingSet',
    'TrainingHistory',
    'train',
    'loss_and_gradients',
    'GradCheckResult',
    'grad_check',
]
