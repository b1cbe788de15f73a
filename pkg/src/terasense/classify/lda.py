from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .base import Classifier, check_features, encode_labels

RIDGE = 1e-6


@dataclass(frozen=True)
class LdaModel(Classifier):
    classes: np.ndarray
    means: np.ndarray
    covariance: np.ndarray
    priors: np.ndarray

    @property
    def n_features(self):
        return self.means.shape[1]

    def discriminants(self, Y):
        Y = check_features(Y, self.n_features)
        A = np.linalg.solve(self.covariance, self.means.T)  # (f, k)
        const = -0.5 * np.sum(self.means.T * A, axis=0) + np.log(self.priors)
        return Y @ A + const

    def scores(self, Y):
        """Posterior class probabilities under the shared-covariance Gaussian model."""
        d = self.discriminants(Y)
        d -= d.max(axis=1, keepdims=True)
        p = np.exp(d)
        return p / p.sum(axis=1, keepdims=True)


def lda_fit(Y, labels, ridge=RIDGE, priors=None):
    """Pooled within-class covariance plus ``ridge * trace/d`` on the diagonal.

    When every class is a single repeated point the within-class covariance
    vanishes and the ridge is scaled by the mean feature variance instead.
    """
    Y = check_features(Y)
    classes, idx = encode_labels(labels)
    k = classes.size
    counts = np.bincount(idx, minlength=k)
    if np.any(counts < 2):
        raise DomainError("LDA needs at least 2 samples per class")
    means = np.stack([Y[idx == c].mean(axis=0) for c in range(k)])
    resid = Y - means[idx]
    dof = max(Y.shape[0] - k, 1)
    cov = resid.T @ resid / dof
    d = cov.shape[0]
    scale = np.trace(cov) / d
    if not scale > 0:
        # noiseless classes: regularise against the total spread instead
        scale = float(np.mean(np.var(Y, axis=0))) or 1.0
    cov = cov + ridge * scale * np.eye(d)
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise DomainError("pooled covariance is singular after regularisation") from None
    if priors is None:
        priors = counts / counts.sum()
    priors = np.asarray(priors, dtype=np.float64)
    if priors.shape != (k,) or np.any(priors <= 0):
        raise DomainError("priors must be positive, one per class")
    return LdaModel(classes, means, cov, priors / priors.sum())


def lda_predict(model, y):
    return model.predict(np.atleast_2d(y))[0]
