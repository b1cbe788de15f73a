from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .base import FeatureSet, as_matrix


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    loadings: np.ndarray
    eigenvalues: np.ndarray
    total_variance: float

    @property
    def n_components(self):
        return self.loadings.shape[1]

    @property
    def explained_variance_ratio(self):
        return self.eigenvalues / self.total_variance

    def transform(self, X):
        X = as_matrix(X)
        if X.shape[1] != self.mean.size:
            raise DomainError(f"model expects {self.mean.size} variables, got {X.shape[1]}")
        return (X - self.mean) @ self.loadings

    def inverse_transform(self, Y):
        return np.asarray(Y) @ self.loadings.T + self.mean


def pca_fit(X, n_components):
    """Top eigenvectors of the sample covariance (divisor M-1).

    Each component's sign is fixed so its largest-magnitude loading is positive.
    """
    X = as_matrix(X)
    M, N = X.shape
    P = int(n_components)
    if not 1 <= P <= min(M - 1, N):
        raise DomainError(f"components must be in [1, {min(M - 1, N)}], got {P}")
    mean = X.mean(axis=0)
    Xc = X - mean
    _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    eig = s ** 2 / (M - 1)
    V = Vt[:P].T.copy()
    for j in range(P):
        if V[np.argmax(np.abs(V[:, j])), j] < 0:
            V[:, j] *= -1.0
    total = float(np.sum(Xc * Xc) / (M - 1))
    return PcaModel(mean, V, eig[:P].copy(), total)


def pca_transform(model, X):
    return FeatureSet(model.transform(X), "pca", {"components": model.n_components})


def cumulative_explained_variance(model):
    return np.cumsum(model.explained_variance_ratio)
