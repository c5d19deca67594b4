"""
Identification Accuracy and Confusion Matrices

Single-window evaluation classifies every test window on its own. For n > 1,
each driver with at least n test windows gets ceil(count / n) trials; a
trial draws n of that driver's windows without replacement and sums their
log-posteriors. Counts in the confusion matrix are per window for n = 1 and
per trial otherwise.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
from sklearn.metrics import confusion_matrix

from app.core.errors import ValidationError
from app.domain.sequence import Dataset
from app.model.generative import GenerativeModel, combine_log_posteriors, log_posterior_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfusionMatrix:
    """
    Args:
        labels: Row and column labels (model drivers, then any unknown truths)
        counts: K x K integer counts, rows are ground truth, columns predictions
    """

    labels: List[str]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=int)
        if counts.shape != (len(self.labels), len(self.labels)):
            raise ValidationError(f"Confusion counts shape {counts.shape} does not match {len(self.labels)} labels")
        object.__setattr__(self, 'counts', counts)

    @classmethod
    def empty(cls, labels: Sequence[str]) -> 'ConfusionMatrix':
        return cls(list(labels), np.zeros((len(labels), len(labels)), dtype=int))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def recall(self) -> np.ndarray:
        rows = self.row_sums
        return np.divide(np.diag(self.counts), rows, out=np.zeros(len(rows)), where=rows > 0)

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total) if self.total else float('nan')

    def as_rows(self) -> List[list]:
        return [[truth] + row.tolist() for truth, row in zip(self.labels, self.counts)]


@dataclass(frozen=True)
class EvaluationResult:
    n_sequences: int
    accuracy: float
    confusion: ConfusionMatrix
    n_trials: int
    skipped: List[str] = field(default_factory=list)


def _trial_indices(n_windows: int, n: int, rng: np.random.Generator) -> List[np.ndarray]:
    return [rng.choice(n_windows, size=n, replace=False) for _ in range(math.ceil(n_windows / n))]


def evaluate_log_posteriors(log_post: np.ndarray, truths: Sequence[str], driver_ids: Sequence[str],
                            n_sequences: int = 1, seed: int = 0) -> EvaluationResult:
    """
    Accuracy and confusion counts from precomputed per-window log-posteriors.

    Args:
        log_post: (N, K) log P(k | window) in driver_ids order
        truths: (N,) ground-truth driver id per window
        driver_ids: Model driver order
        n_sequences: Windows per trial (>= 1)
        seed: Trial sampling seed; unused when n_sequences == 1

    Returns:
        EvaluationResult: Mean accuracy over trials and the confusion matrix
    """
    if n_sequences < 1:
        raise ValidationError(f"n_sequences must be at least 1, got {n_sequences}")
    log_post = np.atleast_2d(log_post)
    if log_post.shape[0] != len(truths):
        raise ValidationError("One ground-truth label is needed per window")

    labels = list(driver_ids) + sorted({t for t in truths if t not in driver_ids})
    y_true: List[str] = []
    y_pred: List[str] = []
    skipped: List[str] = []

    groups: Dict[str, List[int]] = {}
    for i, truth in enumerate(truths):
        groups.setdefault(truth, []).append(i)

    rng = np.random.default_rng(seed)
    for truth, members in groups.items():
        members = np.array(members)
        if len(members) < n_sequences:
            logger.warning(f"Skipping driver {truth}: {len(members)} test windows, {n_sequences} needed per trial")
            skipped.append(truth)
            continue
        if n_sequences == 1:
            trials = [np.array([i]) for i in range(len(members))]
        else:
            trials = _trial_indices(len(members), n_sequences, rng)
        for trial in trials:
            predicted, _ = combine_log_posteriors(log_post[members[trial]], list(driver_ids))
            y_true.append(truth)
            y_pred.append(predicted)

    n_trials = len(y_true)
    if n_trials == 0:
        logger.warning(f"No driver had {n_sequences} test windows; accuracy is undefined")
        confusion = ConfusionMatrix.empty(labels)
    else:
        confusion = ConfusionMatrix(labels, confusion_matrix(y_true, y_pred, labels=labels))
    return EvaluationResult(n_sequences, confusion.accuracy, confusion, n_trials, skipped)


def model_log_posteriors(model: GenerativeModel, raw_features: np.ndarray) -> np.ndarray:
    log_post, degenerate = log_posterior_matrix(model.log_densities(model.embed(raw_features)))
    if degenerate.any():
        logger.warning(f"{int(degenerate.sum())} windows had all driver densities underflow")
    return log_post


def evaluate(model: GenerativeModel, test: Dataset, n_sequences: int = 1, seed: int = 0) -> EvaluationResult:
    """
    Evaluate a model on labeled test windows.

    Args:
        model: Trained model
        test: Resampled, labeled test windows
        n_sequences: Windows combined per identification
        seed: Trial sampling seed

    Returns:
        EvaluationResult: Accuracy, confusion matrix and trial bookkeeping
    """
    test.require_labeled()
    log_post = model_log_posteriors(model, model.featurize(test.sequences))
    truths = [seq.driver_id for seq in test.sequences]
    return evaluate_log_posteriors(log_post, truths, model.driver_ids, n_sequences, seed)


def evaluate_many(model: GenerativeModel, test: Dataset, n_values: Sequence[int],
                  seed: int = 0) -> List[EvaluationResult]:
    """Evaluate several trial sizes, extracting features only once."""
    test.require_labeled()
    log_post = model_log_posteriors(model, model.featurize(test.sequences))
    truths = [seq.driver_id for seq in test.sequences]
    return [evaluate_log_posteriors(log_post, truths, model.driver_ids, n, seed) for n in n_values]
