"""Exact t-SNE with perplexity-calibrated Gaussian affinities.

The O(M^2) gradient runs in the compiled kernel when available.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import DomainError
from .base import FeatureSet, as_matrix

PERPLEXITY_TOL = 1e-4
_MAX_BISECT = 200


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 5.0
    output_dim: int = 2
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum: float = 0.5
    final_momentum: float = 0.8
    momentum_switch: int = 250
    exaggeration: float = 4.0
    exaggeration_iters: int = 50
    init_std: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not self.perplexity >= 1:
            raise DomainError(f"perplexity must be >= 1, got {self.perplexity}")
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")
        if self.output_dim < 1:
            raise DomainError("output_dim must be >= 1")


def squared_distances(A, B=None):
    B = A if B is None else B
    d2 = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.maximum(d2, 0.0)


def _row_distribution(d2, beta):
    """Normalised exp(-beta d2) and its perplexity (2**entropy in bits)."""
    shifted = d2 - d2.min()
    w = np.exp(-beta * shifted)
    z = w.sum()
    p = w / z
    # entropy in nats: log z + beta * E[d2]
    h = np.log(z) + beta * float(p @ shifted)
    return p, np.exp(h)


def calibrate_row(d2, perplexity, tol=PERPLEXITY_TOL):
    """Bisect the Gaussian precision so the row's perplexity hits ``perplexity``.

    Returns (probabilities, beta) where beta = 1/(2 sigma^2).
    """
    if d2.size < 1:
        raise DomainError("need at least one neighbour")
    spread = np.ptp(d2)
    if spread == 0:
        # all neighbours equidistant: every sigma gives the uniform distribution
        return np.full(d2.size, 1.0 / d2.size), 1.0
    lo, hi = 0.0, np.inf
    beta = 1.0 / np.median(d2[d2 > d2.min()] - d2.min()) if np.any(d2 > d2.min()) else 1.0
    p, perp = _row_distribution(d2, beta)
    for _ in range(_MAX_BISECT):
        if abs(perp - perplexity) <= tol:
            break
        if perp > perplexity:
            lo = beta
            beta = beta * 2.0 if hi == np.inf else 0.5 * (beta + hi)
        else:
            hi = beta
            beta = 0.5 * (beta + lo)
        p, perp = _row_distribution(d2, beta)
    return p, beta


def conditional_affinities(X, perplexity, tol=PERPLEXITY_TOL):
    """Row-stochastic matrix of Pr(j|i) with a zero diagonal, plus the betas."""
    X = as_matrix(X)
    M = X.shape[0]
    if not 1 <= perplexity < M:
        raise DomainError(f"perplexity must lie in [1, {M}), got {perplexity}")
    D = squared_distances(X)
    P = np.zeros((M, M))
    betas = np.empty(M)
    for i in range(M):
        idx = np.r_[0:i, i + 1:M]
        P[i, idx], betas[i] = calibrate_row(D[i, idx], perplexity, tol)
    return P, betas


def perplexities(P):
    """Per-row perplexity of a conditional affinity matrix."""
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.where(P > 0, np.log(P), 0.0)
    return np.exp(-np.sum(P * logp, axis=1))


def joint_affinities(P_cond):
    M = P_cond.shape[0]
    return (P_cond + P_cond.T) / (2.0 * M)


def student_q(Y):
    num = 1.0 / (1.0 + squared_distances(Y))
    np.fill_diagonal(num, 0.0)
    return num / num.sum()


def kl_divergence(P, Q):
    """sum P log(P/Q) over off-diagonal entries with P > 0."""
    mask = P > 0
    np.fill_diagonal(mask, False)
    return float(np.sum(P[mask] * np.log(P[mask] / np.maximum(Q[mask], 1e-300))))


@dataclass(frozen=True)
class TsneModel:
    """A fitted embedding; new points are placed by affinity-weighted averaging."""

    train: np.ndarray
    embedding: np.ndarray
    perplexity: float
    kl: float

    def transform(self, X):
        X = as_matrix(X)
        if X.shape[1] != self.train.shape[1]:
            raise DomainError(f"model expects {self.train.shape[1]} variables, got {X.shape[1]}")
        D = squared_distances(X, self.train)
        perp = min(self.perplexity, self.train.shape[0] - 1)
        out = np.empty((X.shape[0], self.embedding.shape[1]))
        for i in range(X.shape[0]):
            p, _ = calibrate_row(D[i], max(perp, 1.0))
            out[i] = p @ self.embedding
        return out


def tsne_optimize(P, cfg, history=None):
    """Gradient descent with momentum and adaptive gains on the KL cost."""
    M = P.shape[0]
    rng = np.random.default_rng(cfg.seed)
    Y = rng.normal(0.0, cfg.init_std, size=(M, cfg.output_dim))
    step = np.zeros_like(Y)
    gains = np.ones_like(Y)
    Pe = P * cfg.exaggeration
    for it in range(cfg.iterations):
        target = Pe if it < cfg.exaggeration_iters else P
        want_cost = history is not None
        grad, cost = kernels.tsne_grad(target, Y, want_cost)
        if want_cost:
            history.append(cost if it >= cfg.exaggeration_iters else kl_divergence(P, student_q(Y)))
        mom = cfg.momentum if it < cfg.momentum_switch else cfg.final_momentum
        same = np.sign(grad) == np.sign(step)
        gains = np.where(same, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        step = mom * step - cfg.learning_rate * gains * grad
        Y = Y + step
        Y -= Y.mean(axis=0)
    return Y


def tsne_fit(X, cfg=TsneConfig(), history=None):
    X = as_matrix(X)
    M = X.shape[0]
    if M < 3:
        raise DomainError("t-SNE needs at least 3 observations")
    if not cfg.perplexity < M:
        raise DomainError(f"perplexity {cfg.perplexity} must be below the sample count {M}")
    P_cond, _ = conditional_affinities(X, cfg.perplexity)
    P = joint_affinities(P_cond)
    Y = tsne_optimize(P, cfg, history)
    return TsneModel(X.copy(), Y, cfg.perplexity, kl_divergence(P, student_q(Y)))


def tsne_embed(X, cfg=TsneConfig()):
    model = tsne_fit(X, cfg)
    return FeatureSet(model.embedding, "tsne", {"perplexity": cfg.perplexity, "output_dim": cfg.output_dim,
                                                 "iterations": cfg.iterations, "seed": cfg.seed})
