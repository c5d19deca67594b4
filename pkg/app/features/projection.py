"""
Feature Standardization and Linear Projection

The standardizer is fit once on training features (population standard
deviation, floored) and then frozen. The projection x = A x_std maps the
standardized 8-vector to the M-dimensional modeling space; after every
training update each row of A is rescaled to unit length, which makes
C(f_j) = sum_i a_ij^2 a measure of how much feature j contributes.
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from app.core.errors import ValidationError
from app.enum.features import N_RAW_FEATURES
from app.features.extractor import RawFeatureVector

STD_FLOOR = 1e-8
ROW_NORM_FLOOR = 1e-12

FeatureInput = Union[RawFeatureVector, np.ndarray, Sequence[float]]


def _as_matrix(features) -> np.ndarray:
    if isinstance(features, np.ndarray):
        matrix = np.atleast_2d(np.asarray(features, dtype=float))
    else:
        matrix = np.array([f.as_array() if isinstance(f, RawFeatureVector) else np.asarray(f, dtype=float)
                           for f in features], dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] != N_RAW_FEATURES:
        raise ValidationError(f"Expected an (N, {N_RAW_FEATURES}) feature matrix, got shape {matrix.shape}")
    return matrix


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        std = np.array(self.std, dtype=float)
        if mean.shape != (N_RAW_FEATURES,) or std.shape != (N_RAW_FEATURES,):
            raise ValidationError("Standardizer mean and std must be 8-vectors")
        if np.any(std <= 0):
            raise ValidationError("Standardizer std components must be strictly positive")
        mean.setflags(write=False)
        std.setflags(write=False)
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'std', std)

    def transform(self, features) -> np.ndarray:
        """Standardize one vector (returns shape (8,)) or a matrix (returns (N, 8))."""
        if isinstance(features, RawFeatureVector):
            return (features.as_array() - self.mean) / self.std
        array = np.asarray(features, dtype=float)
        return (array - self.mean) / self.std

    def inverse(self, standardized) -> np.ndarray:
        return np.asarray(standardized, dtype=float) * self.std + self.mean


def fit_standardizer(features) -> Standardizer:
    """
    Per-dimension mean and population standard deviation (ddof = 0).

    Standard deviations below 1e-8 are floored to 1e-8.

    Args:
        features: RawFeatureVectors or an (N, 8) array, N >= 2

    Returns:
        Standardizer: Frozen statistics
    """
    matrix = _as_matrix(features)
    if matrix.shape[0] < 2:
        raise ValidationError(f"Standardizer needs at least 2 feature vectors, got {matrix.shape[0]}")
    return Standardizer(matrix.mean(axis=0), np.maximum(matrix.std(axis=0), STD_FLOOR))


def standardize(features: FeatureInput, standardizer: Standardizer) -> np.ndarray:
    return standardizer.transform(features)


def destandardize(standardized, standardizer: Standardizer) -> np.ndarray:
    return standardizer.inverse(standardized)


@dataclass(frozen=True)
class ProjectionModel:
    """M x 8 projection matrix A."""

    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[1] != N_RAW_FEATURES:
            raise ValidationError(f"Projection matrix must be M x {N_RAW_FEATURES}, got shape {A.shape}")
        if not 1 <= A.shape[0] <= N_RAW_FEATURES:
            raise ValidationError(f"Projection dimension M must lie in [1, {N_RAW_FEATURES}], got {A.shape[0]}")
        if not np.all(np.isfinite(A)):
            raise ValidationError("Projection matrix contains non-finite values")
        A.setflags(write=False)
        object.__setattr__(self, 'A', A)

    @property
    def M(self) -> int:
        return self.A.shape[0]

    def project(self, x_std) -> np.ndarray:
        """x = A x_std for a vector, or X A^T for an (N, 8) matrix."""
        x_std = np.asarray(x_std, dtype=float)
        if x_std.shape[-1] != N_RAW_FEATURES:
            raise ValidationError(f"Cannot project a vector of length {x_std.shape[-1]} with a "
                                  f"{self.M} x {N_RAW_FEATURES} matrix")
        return x_std @ self.A.T

    def row_normalized(self) -> 'ProjectionModel':
        norms = np.linalg.norm(self.A, axis=1, keepdims=True)
        return ProjectionModel(self.A / np.maximum(norms, ROW_NORM_FLOOR))

    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.A, axis=1)

    def scaled_rows(self, scales) -> 'ProjectionModel':
        return ProjectionModel(self.A * np.asarray(scales, dtype=float)[:, None])

    @classmethod
    def selector(cls, M: int) -> 'ProjectionModel':
        """[I_M | 0]: keeps the first M standardized features."""
        return cls(np.eye(M, N_RAW_FEATURES))

    @classmethod
    def random_orthonormal(cls, M: int, rng: np.random.Generator) -> 'ProjectionModel':
        """Rows drawn from a standard Gaussian and then orthonormalized."""
        if not 1 <= M <= N_RAW_FEATURES:
            raise ValidationError(f"Projection dimension M must lie in [1, {N_RAW_FEATURES}], got {M}")
        gaussian = rng.standard_normal((N_RAW_FEATURES, M))
        q, r = np.linalg.qr(gaussian)
        # fix the sign ambiguity of QR so the draw is a pure function of the rng
        q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
        return cls(q.T)


def project(x_std, projection: ProjectionModel) -> np.ndarray:
    return projection.project(x_std)


def feature_contributions(projection: ProjectionModel) -> np.ndarray:
    """C(f_j) = sum_i a_ij^2; sums to M when the rows of A are unit-norm."""
    return np.sum(projection.A ** 2, axis=0)
