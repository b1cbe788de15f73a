from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDataError, DomainError
from .base import FeatureSet, as_matrix



@dataclass(frozen=True)
class PlsModel:
    """NIPALS PLS2 fit on centred data."""

    x_mean: np.ndarray
    y_mean: np.ndarray
    x_weights: np.ndarray
    x_loadings: np.ndarray
    y_loadings: np.ndarray
    x_rotations: np.ndarray
    train_scores: np.ndarray

    @property
    def n_components(self):
        return self.x_weights.shape[1]

    @property
    def coef(self):
        return self.x_rotations @ self.y_loadings.T

    def transform(self, X):
        X = as_matrix(X)
        if X.shape[1] != self.x_mean.size:
            raise DomainError(f"model expects {self.x_mean.size} variables, got {X.shape[1]}")
        return (X - self.x_mean) @ self.x_rotations

    def predict(self, X):
        return self.transform(X) @ self.y_loadings.T + self.y_mean


def one_hot(labels, classes=None):
    labels = np.asarray(labels).ravel()
    classes = np.unique(labels) if classes is None else np.asarray(classes)
    return (labels[:, None] == classes[None, :]).astype(np.float64)


def pls_fit(X, targets, n_components):
    """Extract latent variables by PLS2 with rank-one deflation of X and Y.

    Each weight vector is the fixed point of the NIPALS inner iteration, taken
    directly as the dominant left singular vector of the deflated X'Y.
    """
    X = as_matrix(X)
    Y = np.asarray(targets, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    M, N = X.shape
    if Y.shape[0] != M:
        raise DomainError(f"{Y.shape[0]} target rows for {M} observations")
    P = int(n_components)
    if not 1 <= P <= min(M - 1, N):
        raise DomainError(f"latent variables must be in [1, {min(M - 1, N)}], got {P}")
    x_mean = X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Xr = X - x_mean
    Yr = Y - y_mean
    if not np.any(Xr.std(axis=0) > 0):
        raise DegenerateDataError("X has zero variance")
    if not np.any(Yr.std(axis=0) > 0):
        raise DegenerateDataError("targets have zero variance")
    scale = max(np.abs(Xr).max(), 1.0)
    W = np.zeros((N, P))
    Pl = np.zeros((N, P))
    Q = np.zeros((Y.shape[1], P))
    T = np.zeros((M, P))
    for k in range(P):
        u = Yr[:, np.argmax(np.sum(Yr * Yr, axis=0))]
        w = Xr.T @ u
        if np.linalg.norm(w) <= 1e-12 * scale * max(np.linalg.norm(u), 1e-300):
            # targets exhausted: continue along the dominant residual X direction
            _, s, Vt = np.linalg.svd(Xr, full_matrices=False)
            if s[0] <= 1e-12 * scale:
                raise DegenerateDataError(f"X is exhausted after {k} latent variables")
            w = Vt[0]
            t = Xr @ w
        else:
            # converged NIPALS weight: dominant left singular vector of X'Y
            U, _, _ = np.linalg.svd(Xr.T @ Yr, full_matrices=False)
            w = U[:, 0]
            if w[np.argmax(np.abs(w))] < 0:
                w = -w
            t = Xr @ w
        tt = t @ t
        p = Xr.T @ t / tt
        q = Yr.T @ t / tt
        Xr = Xr - np.outer(t, p)
        Yr = Yr - np.outer(t, q)
        W[:, k], Pl[:, k], Q[:, k], T[:, k] = w, p, q, t
    R = W @ np.linalg.pinv(Pl.T @ W)
    return PlsModel(x_mean, y_mean, W, Pl, Q, R, T)


def pls_transform(model, X):
    return FeatureSet(model.transform(X), "pls", {"components": model.n_components})
