"""
Generative Driver Model

Bundles the frozen standardizer, the projection, the shared state pool and
the per-driver profiles, and answers posterior queries over drivers. Drivers
get a uniform prior; the posterior is the softmax of the per-driver mixture
log-densities.
"""

import logging
from dataclasses import asdict, dataclass, replace
from types import MappingProxyType
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from app.core.errors import DuplicateDriverError, UnknownDriverError, ValidationError
from app.domain.sequence import CarFollowingSequence
from app.features.extractor import TTC_CAP, ReactionTimeConfig, extract_feature_matrix
from app.features.projection import ProjectionModel, Standardizer
from app.model.gaussian import DriverProfile, StatePool, log_mixture_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelHyper:
    M: int
    Q: int
    window_T: float = 15.0
    overlap_ratio: float = 0.0
    dt: float = 0.1
    tau_min: float = 0.0
    tau_max: float = 5.0
    ttc_cap: float = TTC_CAP
    seed: int = 0

    @property
    def rt_cfg(self) -> ReactionTimeConfig:
        return ReactionTimeConfig(self.tau_min, self.tau_max)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GenerativeModel:
    projection: ProjectionModel
    standardizer: Standardizer
    states: StatePool
    profiles: Mapping[str, DriverProfile]
    hyper: ModelHyper

    def __post_init__(self):
        profiles = dict(self.profiles)
        if self.projection.M != self.states.M or self.hyper.M != self.states.M:
            raise ValidationError(f"Feature dimension mismatch: projection M={self.projection.M}, "
                                  f"states M={self.states.M}, hyper M={self.hyper.M}")
        if self.hyper.Q != self.states.Q:
            raise ValidationError(f"State count mismatch: hyper Q={self.hyper.Q}, pool Q={self.states.Q}")
        for driver_id, profile in profiles.items():
            if profile.Q != self.states.Q:
                raise ValidationError(f"Profile of {driver_id} has {profile.Q} weights for {self.states.Q} states")
        object.__setattr__(self, 'profiles', MappingProxyType(profiles))

    @property
    def driver_ids(self) -> List[str]:
        return list(self.profiles.keys())

    @property
    def K(self) -> int:
        return len(self.profiles)

    def weight_matrix(self) -> np.ndarray:
        return np.array([profile.weights for profile in self.profiles.values()])

    def featurize(self, windows: Sequence[CarFollowingSequence]) -> np.ndarray:
        """Raw (N, 8) features under this model's extraction settings."""
        return extract_feature_matrix(windows, self.hyper.rt_cfg, self.hyper.ttc_cap)

    def embed(self, raw_features: np.ndarray) -> np.ndarray:
        """Standardize then project raw features to the M-dimensional space."""
        return self.projection.project(self.standardizer.transform(np.atleast_2d(raw_features)))

    def log_densities(self, X: np.ndarray) -> np.ndarray:
        """(N, K) per-driver log p_k(x) for projected points X."""
        if self.K == 0:
            raise ValidationError("Model has no driver profiles")
        return log_mixture_matrix(self.states.log_pdf(X), self.weight_matrix())

    def profile(self, driver_id: str) -> DriverProfile:
        if driver_id not in self.profiles:
            raise UnknownDriverError(f"Driver '{driver_id}' is not in the model (known: {', '.join(self.driver_ids)})")
        return self.profiles[driver_id]

    def with_profile(self, driver_id: str, profile: DriverProfile) -> 'GenerativeModel':
        if driver_id in self.profiles:
            raise DuplicateDriverError(f"Driver '{driver_id}' is already registered")
        profiles = dict(self.profiles)
        profiles[driver_id] = profile
        return replace(self, profiles=profiles)


@dataclass(frozen=True)
class Posterior:
    driver_ids: List[str]
    probabilities: np.ndarray
    log_probabilities: np.ndarray
    log_densities: np.ndarray
    degenerate: bool = False

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.probabilities))

    @property
    def predicted(self) -> str:
        return self.driver_ids[self.argmax]

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.driver_ids, self.probabilities.tolist()))


def log_posterior_matrix(log_densities: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Row-wise log-softmax of per-driver log-densities.

    Rows whose densities all underflow to -inf become uniform and are flagged.

    Args:
        log_densities: (N, K)

    Returns:
        Tuple[np.ndarray, np.ndarray]: (N, K) log-posteriors and an (N,) degenerate mask
    """
    log_densities = np.atleast_2d(log_densities)
    K = log_densities.shape[1]
    degenerate = ~np.any(np.isfinite(log_densities), axis=1)

    with np.errstate(invalid='ignore'):
        log_post = log_densities - logsumexp(log_densities, axis=1, keepdims=True)
    log_post[degenerate] = -np.log(K)
    return log_post, degenerate


def posterior_over_drivers(x, model: GenerativeModel) -> Posterior:
    """
    P(k | x) for one projected point.

    Args:
        x: M-vector in the model's feature space
        model: Trained model with K >= 1 drivers

    Returns:
        Posterior: Probabilities in model.driver_ids order
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    log_dens = model.log_densities(x[None, :])
    log_post, degenerate = log_posterior_matrix(log_dens)
    if degenerate[0]:
        logger.warning("All driver densities underflowed; returning a uniform posterior")
    return Posterior(
        driver_ids=model.driver_ids,
        probabilities=np.exp(log_post[0]),
        log_probabilities=log_post[0],
        log_densities=log_dens[0],
        degenerate=bool(degenerate[0])
    )


def window_log_posteriors(windows: Sequence[CarFollowingSequence], model: GenerativeModel) -> np.ndarray:
    """(N, K) log P(k | S_n) for a batch of windows."""
    X = model.embed(model.featurize(windows))
    log_post, degenerate = log_posterior_matrix(model.log_densities(X))
    if degenerate.any():
        logger.warning(f"{int(degenerate.sum())} windows had all driver densities underflow")
    return log_post


def infer_single(seq: CarFollowingSequence, model: GenerativeModel) -> Tuple[str, np.ndarray]:
    """
    Maximum-posterior driver for one window.

    Returns:
        Tuple[str, np.ndarray]: predicted driver id and the posterior vector
    """
    x = model.embed(model.featurize([seq]))[0]
    posterior = posterior_over_drivers(x, model)
    return posterior.predicted, posterior.probabilities


def combine_log_posteriors(log_post: np.ndarray, driver_ids: Sequence[str]) -> Tuple[str, Dict[str, float]]:
    """Sum per-window log-posteriors and take the argmax (smallest index on ties)."""
    scores = np.sum(np.atleast_2d(log_post), axis=0)
    predicted = driver_ids[int(np.argmax(scores))]
    return predicted, dict(zip(driver_ids, scores.tolist()))


def infer_multi(seqs: Sequence[CarFollowingSequence], model: GenerativeModel) -> Tuple[str, Dict[str, float]]:
    """
    Identify a driver from several windows assumed independent.

    Args:
        seqs: One or more windows
        model: Trained model

    Returns:
        Tuple[str, Dict[str, float]]: predicted id and summed log-posterior per driver
    """
    if not seqs:
        raise ValidationError("Multi-sequence inference needs at least one sequence")
    return combine_log_posteriors(window_log_posteriors(seqs, model), model.driver_ids)
