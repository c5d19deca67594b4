"""
EM Estimation of States and Profiles

The E-step computes per-sample responsibilities gamma_k^(n)(q) under the
sample's own driver profile. The M-step sets each profile to its drivers'
mean responsibilities and pools means and covariances over all drivers.
Covariances get REG_COVAR * I added after every M-step; a state whose total
responsibility falls below EMPTY_STATE_MASS is reseeded at a random training
point with identity covariance.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from app.core.errors import NumericalError, ValidationError
from app.model.gaussian import REG_COVAR, DriverProfile, StatePool, log_weights

logger = logging.getLogger(__name__)

EMPTY_STATE_MASS = 1e-8
REVIVE_WEIGHT = 1e-3


@dataclass(frozen=True)
class EMResult:
    """
    Args:
        states: Fitted state pool
        weights: (K, Q) profile weights, one row per driver
        log_likelihood: Trace of the training log-likelihood, n_iter + 1 values
        n_reseeded: Number of empty-state reseeds performed
    """

    states: StatePool
    weights: np.ndarray
    log_likelihood: np.ndarray
    n_reseeded: int = 0

    @property
    def final_log_likelihood(self) -> float:
        return float(self.log_likelihood[-1])

    def profiles(self, driver_ids: Sequence[str]) -> dict:
        return {driver_id: DriverProfile(self.weights[k]) for k, driver_id in enumerate(driver_ids)}


@dataclass(frozen=True)
class EMInit:
    """Warm start: the parameters EM should start from."""

    states: StatePool
    weights: np.ndarray

    @classmethod
    def from_result(cls, result: EMResult) -> 'EMInit':
        return cls(result.states, result.weights)


def stack_groups(features_by_driver: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Concatenate per-driver feature arrays into X and integer driver labels."""
    groups = [np.atleast_2d(np.asarray(g, dtype=float)) for g in features_by_driver]
    if not groups:
        raise ValidationError("EM needs at least one driver")
    for k, group in enumerate(groups):
        if group.shape[0] == 0 or group.size == 0:
            raise ValidationError(f"Driver {k} has no samples")
    X = np.vstack(groups)
    labels = np.concatenate([np.full(g.shape[0], k) for k, g in enumerate(groups)])
    return X, labels


def random_init(X: np.ndarray, n_drivers: int, Q: int, rng: np.random.Generator) -> EMInit:
    """Means drawn without replacement from X, identity covariances, uniform profiles."""
    index = rng.choice(X.shape[0], size=Q, replace=False)
    M = X.shape[1]
    states = StatePool(X[index].copy(), np.tile(np.eye(M), (Q, 1, 1)))
    return EMInit(states, np.full((n_drivers, Q), 1.0 / Q))


def responsibilities(X: np.ndarray, labels: np.ndarray, states: StatePool,
                     weights: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    E-step.

    Returns:
        Tuple[np.ndarray, float]: (N, Q) responsibilities and the log-likelihood
    """
    log_joint = states.log_pdf(X) + log_weights(weights)[labels]
    log_norm = logsumexp(log_joint, axis=1, keepdims=True)
    log_likelihood = float(np.sum(log_norm))
    if not np.isfinite(log_likelihood):
        raise NumericalError(f"Non-finite training log-likelihood ({log_likelihood})", reason="non_finite_likelihood")
    return np.exp(log_joint - log_norm), log_likelihood


def _m_step_weights(gamma: np.ndarray, labels: np.ndarray, n_drivers: int) -> Tuple[np.ndarray, np.ndarray]:
    one_hot = np.eye(n_drivers)[labels]
    mass = one_hot.T @ gamma
    counts = one_hot.sum(axis=0)
    return mass / counts[:, None], mass


def _m_step_states(X: np.ndarray, gamma: np.ndarray, state_mass: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    M = X.shape[1]
    safe_mass = np.maximum(state_mass, EMPTY_STATE_MASS)
    means = (gamma.T @ X) / safe_mass[:, None]
    covariances = np.empty((gamma.shape[1], M, M))
    for q in range(gamma.shape[1]):
        diff = X - means[q]
        covariances[q] = (gamma[:, q, None] * diff).T @ diff / safe_mass[q]
        covariances[q] = 0.5 * (covariances[q] + covariances[q].T) + REG_COVAR * np.eye(M)
    return means, covariances


def _reseed_empty(X: np.ndarray, means: np.ndarray, covariances: np.ndarray, weights: np.ndarray,
                  state_mass: np.ndarray, rng: np.random.Generator) -> int:
    empty = np.flatnonzero(state_mass < EMPTY_STATE_MASS)
    for q in empty:
        means[q] = X[rng.integers(X.shape[0])]
        covariances[q] = np.eye(X.shape[1])
        weights[:, q] = np.maximum(weights[:, q], REVIVE_WEIGHT)
        logger.warning(f"State {q} lost all responsibility; reseeded at a random training point")
    if empty.size:
        weights /= weights.sum(axis=1, keepdims=True)
    return int(empty.size)


def em_fit(features_by_driver: Sequence[np.ndarray], Q: int, n_iter: int,
           init: Optional[EMInit] = None, rng: Union[np.random.Generator, int, None] = None,
           freeze_states: bool = False) -> EMResult:
    """
    Fit the shared state pool and the per-driver profiles by EM.

    Args:
        features_by_driver: One (N_k, M) array per driver, in driver order
        Q: Number of shared states
        n_iter: Number of EM iterations (>= 1)
        init: Warm-start parameters; random initialization when None
        rng: Generator or seed for random initialization and reseeding
        freeze_states: Update only the profiles, keeping the state pool fixed

    Returns:
        EMResult: Fitted parameters and the log-likelihood trace
    """
    X, labels = stack_groups(features_by_driver)
    n_drivers = len(features_by_driver)
    if n_iter < 1:
        raise ValidationError(f"EM needs at least one iteration, got {n_iter}")
    if Q > X.shape[0] and not freeze_states:
        raise ValidationError(f"Cannot fit {Q} states to {X.shape[0]} samples")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    if init is None:
        if freeze_states:
            raise ValidationError("Frozen-state EM needs an initial state pool")
        init = random_init(X, n_drivers, Q, rng)
    if init.states.Q != Q or init.weights.shape != (n_drivers, Q) or init.states.M != X.shape[1]:
        raise ValidationError(f"EM initialization does not match Q={Q}, K={n_drivers}, M={X.shape[1]}")

    states = init.states
    weights = np.array(init.weights, dtype=float)
    trace: List[float] = []
    n_reseeded = 0

    for iteration in range(n_iter):
        gamma, log_likelihood = responsibilities(X, labels, states, weights)
        trace.append(log_likelihood)
        logger.debug(f"EM iteration {iteration}: log-likelihood {log_likelihood:.6f}")

        weights, mass = _m_step_weights(gamma, labels, n_drivers)
        if freeze_states:
            continue

        state_mass = mass.sum(axis=0)
        means, covariances = _m_step_states(X, gamma, state_mass)
        n_reseeded += _reseed_empty(X, means, covariances, weights, state_mass, rng)
        states = StatePool(means, covariances)

    gamma, log_likelihood = responsibilities(X, labels, states, weights)
    if not freeze_states:
        # profiles must match the returned states, not the ones before the last M-step
        weights, _ = _m_step_weights(gamma, labels, n_drivers)
        _, log_likelihood = responsibilities(X, labels, states, weights)
    trace.append(log_likelihood)
    return EMResult(states=states, weights=weights, log_likelihood=np.array(trace), n_reseeded=n_reseeded)
