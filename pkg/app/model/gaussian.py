"""
Gaussian Driver States

The state pool holds Q full-covariance Gaussians shared by every driver. All
densities are evaluated in the log domain through a Cholesky factorization of
each covariance.
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from app.core.errors import NumericalError, ValidationError

logger = logging.getLogger(__name__)

REG_COVAR = 1e-6
SYMMETRY_TOL = 1e-12
SIMPLEX_TOL = 1e-9
LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class DriverState:
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.array(self.mu, dtype=float))
        sigma = np.atleast_2d(np.array(self.sigma, dtype=float))
        if sigma.shape != (mu.size, mu.size):
            raise ValidationError(f"Covariance shape {sigma.shape} does not match mean of length {mu.size}")
        if np.max(np.abs(sigma - sigma.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.max(np.abs(sigma))):
            raise ValidationError("Covariance must be symmetric")
        mu.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, 'mu', mu)
        object.__setattr__(self, 'sigma', sigma)


def _cholesky(sigma: np.ndarray, index: int = 0) -> np.ndarray:
    try:
        return scipy.linalg.cholesky(sigma, lower=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"Covariance of state {index} is not positive definite: {e}", reason="non_pd_covariance")


def log_gaussian_pdf(x, state: DriverState) -> float:
    """
    log N(x | mu, Sigma).

    Args:
        x: M-vector
        state: Gaussian state

    Returns:
        float: Log-density
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != state.mu.shape:
        raise ValidationError(f"Point of length {x.size} does not match state dimension {state.mu.size}")
    L = _cholesky(state.sigma)
    z = scipy.linalg.solve_triangular(L, x - state.mu, lower=True)
    return float(-0.5 * (x.size * LOG_2PI + z @ z) - np.sum(np.log(np.diag(L))))


@dataclass(frozen=True)
class StatePool:
    """
    Q Gaussian states stacked as arrays.

    Args:
        means: (Q, M)
        covariances: (Q, M, M)
    """

    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        means = np.atleast_2d(np.array(self.means, dtype=float))
        covariances = np.array(self.covariances, dtype=float)
        Q, M = means.shape
        if covariances.shape != (Q, M, M):
            raise ValidationError(f"Covariances of shape {covariances.shape} do not match means {means.shape}")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(covariances))):
            raise NumericalError("State pool contains non-finite parameters", reason="non_finite_state")
        means.setflags(write=False)
        covariances.setflags(write=False)
        object.__setattr__(self, 'means', means)
        object.__setattr__(self, 'covariances', covariances)

    @classmethod
    def from_states(cls, states: List[DriverState]) -> 'StatePool':
        return cls(np.array([s.mu for s in states]), np.array([s.sigma for s in states]))

    @property
    def Q(self) -> int:
        return self.means.shape[0]

    @property
    def M(self) -> int:
        return self.means.shape[1]

    @property
    def states(self) -> List[DriverState]:
        return [DriverState(self.means[q], self.covariances[q]) for q in range(self.Q)]

    def __getitem__(self, q: int) -> DriverState:
        return DriverState(self.means[q], self.covariances[q])

    def choleskys(self) -> np.ndarray:
        return np.array([_cholesky(self.covariances[q], q) for q in range(self.Q)])

    def log_pdf(self, X: np.ndarray) -> np.ndarray:
        """(N, Q) matrix of log N(x_n | mu_q, Sigma_q)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.M:
            raise ValidationError(f"Points of dimension {X.shape[1]} do not match state dimension {self.M}")

        out = np.empty((X.shape[0], self.Q))
        for q, L in enumerate(self.choleskys()):
            z = scipy.linalg.solve_triangular(L, (X - self.means[q]).T, lower=True)
            out[:, q] = -0.5 * (self.M * LOG_2PI + np.sum(z * z, axis=0)) - np.sum(np.log(np.diag(L)))
        return out

    def precision_residuals(self, X: np.ndarray) -> np.ndarray:
        """(N, Q, M) array of Sigma_q^{-1} (x_n - mu_q)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], self.Q, self.M))
        for q, L in enumerate(self.choleskys()):
            out[:, q, :] = scipy.linalg.cho_solve((L, True), (X - self.means[q]).T).T
        return out

    def rescaled(self, scales) -> 'StatePool':
        """Map mu -> D mu and Sigma -> D Sigma D for D = diag(scales)."""
        d = np.asarray(scales, dtype=float)
        return StatePool(self.means * d, self.covariances * d[None, :, None] * d[None, None, :])


@dataclass(frozen=True)
class DriverProfile:
    """A driver's weights over the shared state pool."""

    weights: np.ndarray

    def __post_init__(self):
        weights = np.atleast_1d(np.array(self.weights, dtype=float))
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > SIMPLEX_TOL:
            raise ValidationError(f"Profile weights must lie on the simplex (sum={weights.sum()!r})")
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)

    @property
    def Q(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, Q: int) -> 'DriverProfile':
        return cls(np.full(Q, 1.0 / Q))


def log_weights(weights: np.ndarray) -> np.ndarray:
    with np.errstate(divide='ignore'):
        return np.log(weights)


def log_mixture_matrix(log_pdf: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """
    Per-driver mixture log-densities.

    Args:
        log_pdf: (N, Q) component log-densities
        weights: (K, Q) profile weights

    Returns:
        np.ndarray: (N, K) matrix of log p_k(x_n); zero-weight components drop out
    """
    joint = log_pdf[:, None, :] + log_weights(np.atleast_2d(weights))[None, :, :]
    with np.errstate(divide='ignore', invalid='ignore'):
        return logsumexp(joint, axis=2)


def log_mixture_density(x, profile: DriverProfile, pool: StatePool) -> float:
    """log p_k(x) = log sum_q w_q N(x | mu_q, Sigma_q)."""
    if profile.Q != pool.Q:
        raise ValidationError(f"Profile over {profile.Q} states does not match a pool of {pool.Q}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    active = profile.weights > 0
    component = pool.log_pdf(x[None, :])[0]
    with np.errstate(divide='ignore'):
        return float(logsumexp(component[active] + np.log(profile.weights[active])))
