"""
Training Package

Identification loss, its gradient with respect to the projection, and the
joint EM plus gradient training loop.
"""

from .loss import LabeledFeatures, loss, loss_and_accuracy, loss_gradient_wrt_A, per_sample_log_posteriors
from .trainer import (
    TRACE_HEADER,
    TraceRow,
    TrainingConfig,
    TrainingTrace,
    features_by_driver,
    hyper_settings,
    train,
    train_on_features
)

__all__ = [
    'LabeledFeatures',
    'loss',
    'loss_and_accuracy',
    'loss_gradient_wrt_A',
    'per_sample_log_posteriors',
    'TRACE_HEADER',
    'TraceRow',
    'TrainingConfig',
    'TrainingTrace',
    'features_by_driver',
    'hyper_settings',
    'train',
    'train_on_features'
]
