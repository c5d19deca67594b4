"""
Evaluation Package

Accuracy and confusion matrices for single- and multi-sequence
identification, hyper-parameter sweeps, the registration case study and
report writers.
"""

from .evaluate import (
    ConfusionMatrix,
    EvaluationResult,
    evaluate,
    evaluate_log_posteriors,
    evaluate_many,
    model_log_posteriors
)
from .sweep import (
    SWEEP_AXES,
    CaseStudyResult,
    SweepCell,
    SweepResult,
    SweepSettings,
    registration_case_study,
    sweep
)

__all__ = [
    'ConfusionMatrix',
    'EvaluationResult',
    'evaluate',
    'evaluate_log_posteriors',
    'evaluate_many',
    'model_log_posteriors',
    'SWEEP_AXES',
    'CaseStudyResult',
    'SweepCell',
    'SweepResult',
    'SweepSettings',
    'registration_case_study',
    'sweep'
]
