from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import nnls

from ..errors import DomainError, NonNegativityError
from .base import FeatureSet, as_matrix

_EPS = 1e-300


@dataclass(frozen=True)
class NmfModel:
    W: np.ndarray
    H: np.ndarray
    objective: float
    history: tuple = ()

    @property
    def rank(self):
        return self.H.shape[0]

    def transform(self, X):
        return nmf_coefficients(X, self.H)


def _check_nonneg(X):
    X = as_matrix(X)
    if np.any(X < 0):
        raise NonNegativityError(f"{int(np.count_nonzero(X < 0))} negative entries in a non-negative factorization input")
    return X


def frobenius_objective(X, W, H):
    R = X - W @ H
    return float(np.sum(R * R))


def _update_w(X, W, H):
    W *= (X @ H.T) / np.maximum(W @ (H @ H.T), _EPS)


def _update_h(X, W, H):
    H *= (W.T @ X) / np.maximum((W.T @ W) @ H, _EPS)


def nmf_fit(X, rank, iterations=200, seed=0, tol=0.0):
    """Lee-Seung multiplicative updates for min ||X - W H||_F^2.

    ``history`` records the objective after every iteration (non-increasing).
    With ``tol`` > 0 the loop stops once the relative decrease over one
    iteration falls below it. A final exact W step makes the returned W the
    one :func:`nmf_coefficients` gives for the returned H.
    """
    X = _check_nonneg(X)
    M, N = X.shape
    P = int(rank)
    if not 1 <= P <= min(M, N):
        raise DomainError(f"rank must be in [1, {min(M, N)}], got {P}")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(max(X.mean(), 1e-12) / P)
    W = rng.uniform(0.0, 1.0, size=(M, P)) * scale
    H = rng.uniform(0.0, 1.0, size=(P, N)) * scale
    history = [frobenius_objective(X, W, H)]
    for _ in range(int(iterations)):
        _update_h(X, W, H)
        _update_w(X, W, H)
        history.append(frobenius_objective(X, W, H))
        if tol > 0 and history[-2] - history[-1] <= tol * history[-2]:
            break
    W_exact = nmf_coefficients(X, H)
    obj = frobenius_objective(X, W_exact, H)
    if obj <= history[-1]:
        W = W_exact
        history.append(obj)
    return NmfModel(W, H, history[-1], tuple(history))


def nmf_coefficients(X, H):
    """Non-negative coefficients of each row of X against fixed H.

    Solves the W-only subproblem exactly (active-set NNLS per row), i.e. the
    fixed point that W-only multiplicative updates converge to.
    """
    X = _check_nonneg(X)
    if X.shape[1] != H.shape[1]:
        raise DomainError(f"model expects {H.shape[1]} variables, got {X.shape[1]}")
    P = H.shape[0]
    W = np.zeros((X.shape[0], P))
    rows = np.flatnonzero(np.any(X > 0, axis=1))
    try:
        # ||x - H'w||^2 = ||L'w - L^-1 H x||^2 + const with H H' = L L': a P x P problem per row
        L = np.linalg.cholesky(H @ H.T)
        d = np.abs(np.diag(L))
        if d.min() < 1e-6 * d.max():
            raise np.linalg.LinAlgError("ill-conditioned Gram matrix")
        A = np.ascontiguousarray(L.T)
        B = solve_triangular(L, H @ X[rows].T, lower=True).T
    except np.linalg.LinAlgError:
        A = np.ascontiguousarray(H.T)
        B = X[rows]
    for i, b in zip(rows, B):
        W[i] = nnls(A, b)[0]
    return W


def nmf_transform(model, X):
    return FeatureSet(model.transform(X), "nmf", {"rank": model.rank})
