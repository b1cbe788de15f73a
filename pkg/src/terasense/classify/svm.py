"""One-vs-one linear soft-margin SVM trained on the primal."""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import DomainError
from .base import Classifier, check_features, encode_labels


def primal_objective(X, y, a, b, c):
    """0.5 |a|^2 + c * sum of hinge slacks, with y in {-1, +1}."""
    margins = y * (X @ a + b)
    return 0.5 * float(a @ a) + c * float(np.sum(np.maximum(0.0, 1.0 - margins)))


@dataclass(frozen=True)
class SvmModel(Classifier):
    classes: np.ndarray
    pairs: np.ndarray      # (n_pairs, 2) class indices (i < j)
    weights: np.ndarray    # (n_pairs, n_features)
    biases: np.ndarray     # (n_pairs,)
    penalty: float

    @property
    def n_features(self):
        return self.weights.shape[1]

    def decision(self, Y):
        Y = check_features(Y, self.n_features)
        return Y @ self.weights.T + self.biases

    def votes(self, Y):
        """Vote counts and summed signed margins per class."""
        D = self.decision(Y)
        k = self.classes.size
        votes = np.zeros((D.shape[0], k))
        margin = np.zeros((D.shape[0], k))
        for p, (i, j) in enumerate(self.pairs):
            d = D[:, p]
            # d == 0 goes to the lower class index i
            votes[:, i] += d >= 0
            votes[:, j] += d < 0
            margin[:, i] += d
            margin[:, j] -= d
        return votes, margin

    def scores(self, Y):
        """Vote share in [0, 1] per class."""
        votes, _ = self.votes(Y)
        return votes / max(self.classes.size - 1, 1)

    def predict(self, Y):
        votes, margin = self.votes(Y)
        out = np.empty(votes.shape[0], dtype=np.intp)
        for r in range(votes.shape[0]):
            top = np.flatnonzero(votes[r] == votes[r].max())
            if top.size > 1:
                m = margin[r, top]
                top = top[m == m.max()]
            out[r] = top[0]
        return self.classes[out]


def svm_fit(Y, labels, c=1.0, epochs=50, seed=0):
    """Train k(k-1)/2 pairwise models by seeded per-sample sub-gradient descent."""
    Y = check_features(Y)
    classes, idx = encode_labels(labels)
    if classes.size < 2:
        raise DomainError("SVM needs at least two classes")
    if not c > 0:
        raise DomainError(f"penalty must be > 0, got {c}")
    k = classes.size
    pairs, weights, biases = [], [], []
    for i in range(k):
        for j in range(i + 1, k):
            mask = (idx == i) | (idx == j)
            X = np.ascontiguousarray(Y[mask])
            y = np.where(idx[mask] == i, 1.0, -1.0)
            rng = np.random.default_rng([seed, i, j])
            orders = rng.permuted(np.tile(np.arange(X.shape[0]), (int(epochs), 1)), axis=1)
            a, b, _ = kernels.svm_pegasos(X, y, float(c), orders)
            pairs.append((i, j))
            weights.append(a)
            biases.append(b)
    return SvmModel(classes, np.array(pairs, dtype=np.intp).reshape(-1, 2),
                    np.array(weights).reshape(len(pairs), Y.shape[1]), np.array(biases), float(c))


def svm_predict(model, y):
    return model.predict(np.atleast_2d(y))[0]
