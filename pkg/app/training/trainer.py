"""
Joint Training Loop

Alternates warm-started EM on the projected features with a full-batch
gradient step on the projection matrix A, adapting the learning rate after
every step and caching the best parameters seen. The cached best is refined
with a long final EM run; the profiles are then re-estimated against the
final states by the same weights-only EM that registers new drivers.
"""

import logging
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.errors import NumericalError, TrainingError, ValidationError
from app.domain.sequence import Dataset, ResampleConfig
from app.features.extractor import TTC_CAP, ReactionTimeConfig, extract_feature_matrix
from app.features.projection import ProjectionModel, Standardizer, fit_standardizer
from app.model.em import EMInit, EMResult, em_fit
from app.model.generative import GenerativeModel, ModelHyper
from app.model.registration import DEFAULT_REGISTRATION_ITERATIONS
from app.training.loss import LabeledFeatures, loss_and_accuracy, loss_gradient_wrt_A

logger = logging.getLogger(__name__)

TRACE_HEADER = ('iter', 'loss', 'train_acc', 'lr', 'is_best', 'best_loss', 'row_norm_error', 'em_log_likelihood')


@dataclass(frozen=True)
class TrainingConfig:
    """
    Hyper-parameters of one training run.

    Args:
        M: Projected feature dimension (1..8)
        Q: Number of shared states
        n_outer: Outer gradient iterations
        n_inner: EM iterations per outer step
        lr: Initial learning rate
        lr_up: Factor applied after an improving step
        lr_down: Factor applied after a worsening step
        lr_max: Upper bound of the learning rate
        n_final_em: EM iterations run from the cached best at the end (0 skips it)
        seed: Seed of the projection initialization and of EM
        freeze_projection: Skip the gradient step, reducing training to EM
    """

    M: int = 2
    Q: int = 8
    n_outer: int = 10
    n_inner: int = 10
    lr: float = 0.01
    lr_up: float = 1.1
    lr_down: float = 0.5
    lr_max: float = 0.1
    n_final_em: int = 200
    seed: int = 0
    freeze_projection: bool = False

    def __post_init__(self):
        if not 1 <= self.M <= 8:
            raise ValidationError(f"M must lie in [1, 8], got {self.M}")
        if self.Q < 1:
            raise ValidationError(f"Q must be at least 1, got {self.Q}")
        if self.n_outer < 0 or self.n_final_em < 0:
            raise ValidationError("n_outer and n_final_em must be non-negative")
        if self.n_inner < 1:
            raise ValidationError(f"n_inner must be at least 1, got {self.n_inner}")
        if not self.lr_up > 1.0 > self.lr_down > 0.0:
            raise ValidationError(f"Learning-rate factors must satisfy lr_up > 1 > lr_down > 0, "
                                  f"got {self.lr_up} and {self.lr_down}")
        if not 0.0 < self.lr <= self.lr_max:
            raise ValidationError(f"Learning rate must satisfy 0 < lr <= lr_max ({self.lr_max}), got {self.lr}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TraceRow:
    iter: int
    loss: float
    train_acc: float
    lr: float
    is_best: bool
    best_loss: float
    row_norm_error: float
    em_log_likelihood: float

    def as_row(self) -> tuple:
        return tuple(getattr(self, name) for name in TRACE_HEADER)


@dataclass
class TrainingTrace:
    """Per-outer-iteration record; row 0 is the state before the first gradient step."""

    rows: List[TraceRow] = field(default_factory=list)

    def append(self, row: TraceRow) -> None:
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def losses(self) -> np.ndarray:
        return np.array([row.loss for row in self.rows])

    @property
    def best_losses(self) -> np.ndarray:
        return np.array([row.best_loss for row in self.rows])

    @property
    def learning_rates(self) -> np.ndarray:
        return np.array([row.lr for row in self.rows])

    @property
    def accuracies(self) -> np.ndarray:
        return np.array([row.train_acc for row in self.rows])

    @property
    def best_iteration(self) -> int:
        best = [row.iter for row in self.rows if row.is_best]
        return best[-1] if best else 0

    def as_rows(self) -> List[tuple]:
        return [row.as_row() for row in self.rows]


@dataclass(frozen=True)
class _Snapshot:
    projection: ProjectionModel
    em: EMResult
    loss: float


def _row_norm_error(projection: ProjectionModel) -> float:
    return float(np.max(np.abs(projection.row_norms() - 1.0)))


def _embed_groups(projection: ProjectionModel, X_std: np.ndarray, bounds: Sequence[Tuple[int, int]]) -> List[np.ndarray]:
    X = projection.project(X_std)
    return [X[start:stop] for start, stop in bounds]


def train_on_features(raw_by_driver: Dict[str, np.ndarray], cfg: TrainingConfig,
                      hyper_defaults: Optional[dict] = None,
                      sample_ids: Sequence[str] = ()) -> Tuple[GenerativeModel, TrainingTrace]:
    """
    Run the joint training loop on precomputed raw feature vectors.

    Args:
        raw_by_driver: Driver id -> (N_k, 8) raw features, in driver order
        cfg: Training hyper-parameters
        hyper_defaults: Extraction settings recorded in ModelHyper
            (window_T, overlap_ratio, dt, tau_min, tau_max, ttc_cap)
        sample_ids: Provenance ids in the same stacked order, for error messages

    Returns:
        Tuple[GenerativeModel, TrainingTrace]: Final model and the per-iteration trace
    """
    driver_ids = list(raw_by_driver.keys())
    if len(driver_ids) < 2:
        raise ValidationError(f"Training needs at least 2 drivers, got {len(driver_ids)}")

    groups = [np.atleast_2d(np.asarray(raw_by_driver[d], dtype=float)) for d in driver_ids]
    bounds = []
    offset = 0
    for driver_id, group in zip(driver_ids, groups):
        if group.shape[0] == 0:
            raise ValidationError(f"Driver {driver_id} has no training windows")
        bounds.append((offset, offset + group.shape[0]))
        offset += group.shape[0]

    raw = np.vstack(groups)
    labels = np.concatenate([np.full(g.shape[0], k) for k, g in enumerate(groups)])
    standardizer: Standardizer = fit_standardizer(raw)
    data = LabeledFeatures(standardizer.transform(raw), labels, tuple(sample_ids))

    rng = np.random.default_rng(cfg.seed)
    projection = ProjectionModel.random_orthonormal(cfg.M, rng)
    trace = TrainingTrace()
    lr = cfg.lr

    logger.info(f"Training on {data.N} windows from {len(driver_ids)} drivers "
                f"(M={cfg.M}, Q={cfg.Q}, n_outer={cfg.n_outer}, n_inner={cfg.n_inner})")

    def evaluate(projection: ProjectionModel, em: EMResult) -> Tuple[float, float]:
        try:
            return loss_and_accuracy(projection, em.states, em.weights, data)
        except NumericalError as e:
            raise TrainingError(f"Training aborted after {len(trace)} iterations: {e}", trace=trace)

    em = em_fit(_embed_groups(projection, data.X_std, bounds), cfg.Q, cfg.n_inner, rng=rng)
    current, accuracy = evaluate(projection, em)
    best = _Snapshot(projection, em, current)
    trace.append(TraceRow(0, current, accuracy, lr, True, current, _row_norm_error(projection),
                          em.final_log_likelihood))
    logger.debug(f"Iteration 0: loss {current:.6f}, accuracy {accuracy:.4f}")

    for iteration in range(1, cfg.n_outer + 1):
        if not cfg.freeze_projection:
            gradient = loss_gradient_wrt_A(projection, em.states, em.weights, data)
            projection = ProjectionModel(projection.A - lr * gradient).row_normalized()

        em = em_fit(_embed_groups(projection, data.X_std, bounds), cfg.Q, cfg.n_inner,
                    init=EMInit.from_result(em), rng=rng)
        new_loss, accuracy = evaluate(projection, em)

        lr = min(cfg.lr_up * lr, cfg.lr_max) if new_loss < current else cfg.lr_down * lr
        current = new_loss
        is_best = new_loss < best.loss
        if is_best:
            best = _Snapshot(projection, em, new_loss)

        trace.append(TraceRow(iteration, new_loss, accuracy, lr, is_best, best.loss,
                              _row_norm_error(projection), em.final_log_likelihood))
        logger.debug(f"Iteration {iteration}: loss {new_loss:.6f}, accuracy {accuracy:.4f}, lr {lr:.6g}")

    final_em = best.em
    if cfg.n_final_em > 0:
        final_em = em_fit(_embed_groups(best.projection, data.X_std, bounds), cfg.Q, cfg.n_final_em,
                          init=EMInit.from_result(best.em), rng=rng)
    # profiles are re-estimated exactly as registration would, so a registered
    # driver and a trained one with the same data get the same profile
    uniform = np.full((len(driver_ids), cfg.Q), 1.0 / cfg.Q)
    final_em = em_fit(_embed_groups(best.projection, data.X_std, bounds), cfg.Q, DEFAULT_REGISTRATION_ITERATIONS,
                      init=EMInit(final_em.states, uniform), freeze_states=True)

    hyper = ModelHyper(M=cfg.M, Q=cfg.Q, seed=cfg.seed, **(hyper_defaults or {}))
    model = GenerativeModel(
        projection=best.projection,
        standardizer=standardizer,
        states=final_em.states,
        profiles=final_em.profiles(driver_ids),
        hyper=hyper
    )
    logger.info(f"Training finished: best loss {best.loss:.6f} at iteration {trace.best_iteration}")
    return model, trace


def features_by_driver(dataset: Dataset, rt_cfg: ReactionTimeConfig = ReactionTimeConfig(),
                       ttc_cap: float = TTC_CAP) -> Tuple[Dict[str, np.ndarray], List[str]]:
    """Raw features grouped by driver in first-appearance order, plus the stacked source ids."""
    dataset.require_labeled()
    raw_by_driver: Dict[str, np.ndarray] = OrderedDict()
    sample_ids: List[str] = []
    for driver_id, windows in dataset.by_driver().items():
        raw_by_driver[driver_id] = extract_feature_matrix(windows, rt_cfg, ttc_cap)
        sample_ids.extend(window.source_id for window in windows)
    return raw_by_driver, sample_ids


def hyper_settings(dataset: Dataset, resample_cfg: ResampleConfig, rt_cfg: ReactionTimeConfig,
                   ttc_cap: float) -> dict:
    return {
        'window_T': resample_cfg.window_T,
        'overlap_ratio': resample_cfg.overlap_ratio,
        'dt': dataset.sequences[0].dt,
        'tau_min': rt_cfg.tau_min,
        'tau_max': rt_cfg.tau_max,
        'ttc_cap': ttc_cap
    }


def train(dataset: Dataset, cfg: TrainingConfig,
          resample_cfg: Optional[ResampleConfig] = None,
          rt_cfg: ReactionTimeConfig = ReactionTimeConfig(),
          ttc_cap: float = TTC_CAP) -> Tuple[GenerativeModel, TrainingTrace]:
    """
    Train a model on labeled windows.

    Args:
        dataset: Validated and resampled windows, each labeled with its driver
        cfg: Training hyper-parameters
        resample_cfg: Windowing that produced the dataset, recorded in the model
        rt_cfg: Reaction-time lag range for feature extraction
        ttc_cap: TTC cap for feature extraction

    Returns:
        Tuple[GenerativeModel, TrainingTrace]: Final model and trace
    """
    resample_cfg = resample_cfg or ResampleConfig()
    raw_by_driver, sample_ids = features_by_driver(dataset, rt_cfg, ttc_cap)
    return train_on_features(raw_by_driver, cfg, hyper_settings(dataset, resample_cfg, rt_cfg, ttc_cap), sample_ids)
