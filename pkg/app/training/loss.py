"""
Identification Loss and its Gradient with respect to the Projection

L = sum_n -log P(k_n | A x_std_n) with the states and profiles held fixed.
The gradient only differentiates through the projected points; the
dependence of the EM solution on A is ignored, which is the approximation
the outer loop relies on.

With g_k(x) = sum_q gt_kq(x) Sigma_q^{-1} (x - mu_q), where gt are the
within-driver responsibilities, grad_x log p_k(x) = -g_k(x) and

    d(-log P(k_gt | x)) / dx = sum_k (1[k = k_gt] - P(k | x)) g_k(x)

which is accumulated into dL/dA through the outer product with x_std.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.core.errors import NumericalError, ValidationError
from app.features.projection import ProjectionModel
from app.model.gaussian import StatePool, log_mixture_matrix, log_weights
from app.model.generative import log_posterior_matrix


@dataclass(frozen=True)
class LabeledFeatures:
    """
    Standardized training features with integer driver labels.

    Args:
        X_std: (N, 8) standardized raw features
        labels: (N,) driver indices into the model's driver order
        sample_ids: Optional provenance ids used in error messages
    """

    X_std: np.ndarray
    labels: np.ndarray
    sample_ids: Tuple[str, ...] = ()

    @property
    def N(self) -> int:
        return self.X_std.shape[0]

    def sample_id(self, index: int) -> str:
        return self.sample_ids[index] if index < len(self.sample_ids) else f"#{index}"


def _check_labels(data: LabeledFeatures, K: int) -> None:
    if data.N == 0:
        raise ValidationError("Loss needs at least one labeled sample")
    if np.any(data.labels < 0) or np.any(data.labels >= K):
        raise ValidationError(f"Sample labels must index one of the model's {K} drivers")


def per_sample_log_posteriors(projection: ProjectionModel, states: StatePool, weights: np.ndarray,
                              data: LabeledFeatures) -> np.ndarray:
    """(N, K) log P(k | x_n) under the given parameters."""
    X = projection.project(data.X_std)
    log_post, _ = log_posterior_matrix(log_mixture_matrix(states.log_pdf(X), weights))
    return log_post


def loss(projection: ProjectionModel, states: StatePool, weights: np.ndarray, data: LabeledFeatures) -> float:
    """
    Negative log-posterior of the ground-truth drivers, summed over samples.

    Raises:
        NumericalError: naming the first sample whose term is not finite
    """
    _check_labels(data, weights.shape[0])
    terms = -per_sample_log_posteriors(projection, states, weights, data)[np.arange(data.N), data.labels]
    bad = np.flatnonzero(~np.isfinite(terms))
    if bad.size:
        raise NumericalError(f"Non-finite loss term for sample {data.sample_id(int(bad[0]))}", reason="non_finite_loss")
    return float(np.sum(terms))


def loss_and_accuracy(projection: ProjectionModel, states: StatePool, weights: np.ndarray,
                      data: LabeledFeatures) -> Tuple[float, float]:
    """Loss plus single-sample argmax accuracy from the same posterior pass."""
    _check_labels(data, weights.shape[0])
    log_post = per_sample_log_posteriors(projection, states, weights, data)
    terms = -log_post[np.arange(data.N), data.labels]
    bad = np.flatnonzero(~np.isfinite(terms))
    if bad.size:
        raise NumericalError(f"Non-finite loss term for sample {data.sample_id(int(bad[0]))}", reason="non_finite_loss")
    accuracy = float(np.mean(np.argmax(log_post, axis=1) == data.labels))
    return float(np.sum(terms)), accuracy


def loss_gradient_wrt_A(projection: ProjectionModel, states: StatePool, weights: np.ndarray,
                        data: LabeledFeatures) -> np.ndarray:
    """
    dL/dA with mu, Sigma and the profiles held fixed.

    Args:
        projection: Current projection A (M x 8)
        states: State pool in the projected space
        weights: (K, Q) profile weights
        data: Standardized labeled features

    Returns:
        np.ndarray: M x 8 gradient
    """
    K = weights.shape[0]
    _check_labels(data, K)
    X = projection.project(data.X_std)

    log_pdf = states.log_pdf(X)
    joint = log_pdf[:, None, :] + log_weights(weights)[None, :, :]
    log_dens = log_mixture_matrix(log_pdf, weights)
    log_post, _ = log_posterior_matrix(log_dens)

    with np.errstate(invalid='ignore'):
        within = np.exp(joint - log_dens[:, :, None])
    within = np.where(np.isfinite(within), within, 0.0)

    g = np.einsum('nkq,nqm->nkm', within, states.precision_residuals(X))
    coeff = np.eye(K)[data.labels] - np.exp(log_post)
    grad_x = np.einsum('nk,nkm->nm', coeff, g)

    grad = grad_x.T @ data.X_std
    if not np.all(np.isfinite(grad)):
        raise NumericalError("Non-finite gradient with respect to the projection", reason="non_finite_gradient")
    return grad
