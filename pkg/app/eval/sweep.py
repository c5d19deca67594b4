"""
Hyper-parameter Sweeps and the Registration Case Study

A sweep trains one model per grid cell and repetition. Repetitions differ
only in the model seed (base seed + repetition index); the train/test split
stays fixed. Overlapping windows are used for training only, test windows
never overlap. A failing run is logged and recorded in its cell.
"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.core.errors import DriveStateError, ValidationError
from app.domain.sequence import Dataset, ResampleConfig
from app.eval.evaluate import EvaluationResult, evaluate, evaluate_log_posteriors, model_log_posteriors
from app.features.extractor import TTC_CAP, ReactionTimeConfig, extract_feature_matrix
from app.model.generative import GenerativeModel
from app.model.registration import register_driver
from app.training.trainer import TrainingConfig, features_by_driver, hyper_settings, train, train_on_features

logger = logging.getLogger(__name__)

SWEEP_AXES = ('M', 'Q', 'window_T', 'overlap_ratio', 'n_sequences')


@dataclass(frozen=True)
class SweepSettings:
    """Everything a sweep cell does not override."""

    training: TrainingConfig = field(default_factory=TrainingConfig)
    resample: ResampleConfig = field(default_factory=ResampleConfig)
    rt_cfg: ReactionTimeConfig = field(default_factory=ReactionTimeConfig)
    ttc_cap: float = TTC_CAP
    n_sequences: int = 1
    repetitions: int = 1

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValidationError(f"repetitions must be at least 1, got {self.repetitions}")
        if self.n_sequences < 1:
            raise ValidationError(f"n_sequences must be at least 1, got {self.n_sequences}")


@dataclass
class SweepCell:
    values: Dict[str, Any]
    seeds: List[int] = field(default_factory=list)
    train_accuracies: List[float] = field(default_factory=list)
    test_accuracies: List[float] = field(default_factory=list)
    failures: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def n_runs(self) -> int:
        return len(self.train_accuracies)

    @property
    def mean_train_accuracy(self) -> float:
        return float(np.mean(self.train_accuracies)) if self.train_accuracies else float('nan')

    @property
    def mean_test_accuracy(self) -> float:
        return float(np.mean(self.test_accuracies)) if self.test_accuracies else float('nan')


@dataclass
class SweepResult:
    axes: List[str]
    cells: List[SweepCell]
    repetitions: int

    @property
    def n_failures(self) -> int:
        return sum(len(cell.failures) for cell in self.cells)

    def axis_values(self, axis: str) -> List[Any]:
        seen: List[Any] = []
        for cell in self.cells:
            if cell.values[axis] not in seen:
                seen.append(cell.values[axis])
        return seen

    def cell(self, **values) -> SweepCell:
        for cell in self.cells:
            if all(cell.values[k] == v for k, v in values.items()):
                return cell
        raise KeyError(values)

    def grid(self, row_axis: str, col_axis: str, metric: str = 'test') -> np.ndarray:
        """Mean accuracy laid out with row_axis down and col_axis across."""
        rows, cols = self.axis_values(row_axis), self.axis_values(col_axis)
        table = np.full((len(rows), len(cols)), np.nan)
        for cell in self.cells:
            value = cell.mean_test_accuracy if metric == 'test' else cell.mean_train_accuracy
            table[rows.index(cell.values[row_axis]), cols.index(cell.values[col_axis])] = value
        return table


@dataclass
class _Prepared:
    raw_by_driver: Dict[str, np.ndarray]
    sample_ids: List[str]
    hyper: dict
    test_raw: np.ndarray
    test_truths: List[str]


def _prepare(train_raw: Dataset, test_raw: Dataset, resample: ResampleConfig,
             settings: SweepSettings) -> _Prepared:
    train_windows = train_raw.resampled(resample)
    test_windows = test_raw.resampled(ResampleConfig(resample.window_T, 0.0))
    if len(train_windows) == 0:
        raise ValidationError(f"No training windows at T={resample.window_T}")
    raw_by_driver, sample_ids = features_by_driver(train_windows, settings.rt_cfg, settings.ttc_cap)
    return _Prepared(
        raw_by_driver=raw_by_driver,
        sample_ids=sample_ids,
        hyper=hyper_settings(train_windows, resample, settings.rt_cfg, settings.ttc_cap),
        test_raw=extract_feature_matrix(test_windows.sequences, settings.rt_cfg, settings.ttc_cap),
        test_truths=[seq.driver_id for seq in test_windows.sequences]
    )


def _run_cell(prepared: _Prepared, cfg: TrainingConfig, n_sequences: int) -> Tuple[float, float]:
    model, _ = train_on_features(prepared.raw_by_driver, cfg, prepared.hyper, prepared.sample_ids)

    train_raw = np.vstack(list(prepared.raw_by_driver.values()))
    train_truths = [d for d, raw in prepared.raw_by_driver.items() for _ in range(raw.shape[0])]
    train_result = evaluate_log_posteriors(model_log_posteriors(model, train_raw), train_truths,
                                           model.driver_ids, 1)
    if prepared.test_raw.shape[0] == 0:
        return train_result.accuracy, float('nan')
    test_result = evaluate_log_posteriors(model_log_posteriors(model, prepared.test_raw), prepared.test_truths,
                                          model.driver_ids, n_sequences, seed=cfg.seed)
    return train_result.accuracy, test_result.accuracy


def sweep(grid: Mapping[str, Sequence[Any]], train_raw: Dataset, test_raw: Dataset,
          settings: SweepSettings) -> SweepResult:
    """
    Train and evaluate every cell of a hyper-parameter grid.

    Args:
        grid: Axis name -> values; axes from M, Q, window_T, overlap_ratio, n_sequences
        train_raw: Validated raw training sequences
        test_raw: Validated raw test sequences
        settings: Base configuration, repetitions and seed

    Returns:
        SweepResult: Per-cell accuracies, seeds and recorded failures
    """
    unknown = [axis for axis in grid if axis not in SWEEP_AXES]
    if unknown:
        raise ValidationError(f"Unknown sweep axes {unknown}; allowed: {', '.join(SWEEP_AXES)}")
    if not grid or any(len(values) == 0 for values in grid.values()):
        raise ValidationError("Sweep grid needs at least one value on every axis")

    axes = list(grid.keys())
    cache: Dict[Tuple[float, float], _Prepared] = {}
    cells: List[SweepCell] = []

    for combination in itertools.product(*(grid[axis] for axis in axes)):
        values = dict(zip(axes, combination))
        cell = SweepCell(values=values)
        cells.append(cell)

        resample = ResampleConfig(float(values.get('window_T', settings.resample.window_T)),
                                  float(values.get('overlap_ratio', settings.resample.overlap_ratio)))
        key = (resample.window_T, resample.overlap_ratio)
        try:
            if key not in cache:
                cache[key] = _prepare(train_raw, test_raw, resample, settings)
        except DriveStateError as e:
            logger.warning(f"Sweep cell {values} cannot be prepared: {e}")
            cell.failures.extend((settings.training.seed + rep, e.reason) for rep in range(settings.repetitions))
            continue

        for rep in range(settings.repetitions):
            seed = settings.training.seed + rep
            cell.seeds.append(seed)
            try:
                cfg = replace(settings.training, seed=seed,
                              M=int(values.get('M', settings.training.M)),
                              Q=int(values.get('Q', settings.training.Q)))
                train_acc, test_acc = _run_cell(cache[key], cfg, int(values.get('n_sequences', settings.n_sequences)))
            except DriveStateError as e:
                logger.warning(f"Sweep cell {values}, seed {seed} failed: {e}")
                cell.failures.append((seed, e.reason))
                continue
            cell.train_accuracies.append(train_acc)
            cell.test_accuracies.append(test_acc)
        logger.info(f"Sweep cell {values}: train {cell.mean_train_accuracy:.4f}, "
                    f"test {cell.mean_test_accuracy:.4f} over {cell.n_runs} runs")

    return SweepResult(axes=axes, cells=cells, repetitions=settings.repetitions)


@dataclass(frozen=True)
class CaseStudyResult:
    """
    Args:
        driver_id: The held-out driver
        results: Model name -> evaluation; A1 excludes the driver, A2 is A1 with
            the driver registered, A3 is trained on every driver. The
            "A2-known" entry evaluates A2 on the test windows of A1's drivers only.
        models: Model name -> model
    """

    driver_id: str
    results: Dict[str, EvaluationResult]
    models: Dict[str, GenerativeModel]


def registration_case_study(train_windows: Dataset, test_windows: Dataset, driver_id: str,
                            cfg: TrainingConfig, resample_cfg: Optional[ResampleConfig] = None,
                            rt_cfg: ReactionTimeConfig = ReactionTimeConfig(),
                            ttc_cap: float = TTC_CAP, n_sequences: int = 1) -> CaseStudyResult:
    """
    Compare a model trained without a driver, the same model after registering
    that driver from their own training windows, and a model trained with all drivers.
    """
    if driver_id not in train_windows.driver_ids:
        raise ValidationError(f"Driver '{driver_id}' has no training windows", reason="unknown_driver")

    without = train_windows.without([driver_id])
    own = train_windows.subset([driver_id])
    known_test = test_windows.without([driver_id])

    a1, _ = train(without, cfg, resample_cfg, rt_cfg, ttc_cap)
    a2 = register_driver(a1, driver_id, own.sequences)
    a3, _ = train(train_windows, cfg, resample_cfg, rt_cfg, ttc_cap)

    results = {
        'A1': evaluate(a1, test_windows, n_sequences, cfg.seed),
        'A2': evaluate(a2, test_windows, n_sequences, cfg.seed),
        'A2-known': evaluate(a2, known_test, n_sequences, cfg.seed),
        'A3': evaluate(a3, test_windows, n_sequences, cfg.seed)
    }
    for name, result in results.items():
        logger.info(f"Case study {name} ({driver_id}): accuracy {result.accuracy:.4f}")
    return CaseStudyResult(driver_id, results, {'A1': a1, 'A2': a2, 'A3': a3})
