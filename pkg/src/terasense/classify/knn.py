from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .base import Classifier, check_features, encode_labels

METRICS = ("euclidean", "mahalanobis", "chebychev", "correlation")
WEIGHT_EPS = 1e-12


@dataclass(frozen=True)
class KnnModel(Classifier):
    """Stored training set with inverse-distance weighted voting."""

    classes: np.ndarray
    train: np.ndarray
    train_idx: np.ndarray
    k: int = 10
    metric: str = "euclidean"
    inv_cov: np.ndarray = None

    @property
    def n_features(self):
        return self.train.shape[1]

    def distances(self, Y):
        Y = check_features(Y, self.n_features)
        T = self.train
        if self.metric == "euclidean":
            d2 = np.sum(Y * Y, 1)[:, None] + np.sum(T * T, 1)[None, :] - 2.0 * Y @ T.T
            return np.sqrt(np.maximum(d2, 0.0))
        if self.metric == "mahalanobis":
            diff = Y[:, None, :] - T[None, :, :]
            return np.sqrt(np.maximum(np.einsum("qtf,fg,qtg->qt", diff, self.inv_cov, diff), 0.0))
        if self.metric == "chebychev":
            return np.max(np.abs(Y[:, None, :] - T[None, :, :]), axis=2)
        # correlation distance: 1 - Pearson r
        Yc = Y - Y.mean(1, keepdims=True)
        Tc = T - T.mean(1, keepdims=True)
        ny = np.linalg.norm(Yc, axis=1)[:, None]
        nt = np.linalg.norm(Tc, axis=1)[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            r = (Yc @ Tc.T) / (ny * nt)
        return 1.0 - np.nan_to_num(r, nan=0.0)

    def scores(self, Y):
        """Share of inverse-distance weight per class among the K nearest."""
        D = self.distances(Y)
        k = self.k
        # stable sort keeps the earlier training sample on distance ties
        nearest = np.argsort(D, axis=1, kind="stable")[:, :k]
        w = 1.0 / (np.take_along_axis(D, nearest, axis=1) + WEIGHT_EPS)
        S = np.zeros((D.shape[0], self.classes.size))
        np.add.at(S, (np.repeat(np.arange(D.shape[0]), k), self.train_idx[nearest].ravel()), w.ravel())
        return S / S.sum(axis=1, keepdims=True)


def knn_fit(Y, labels, k=10, metric="euclidean"):
    Y = check_features(Y)
    classes, idx = encode_labels(labels)
    if metric not in METRICS:
        raise DomainError(f"unknown metric {metric!r}; choose from {METRICS}")
    if not 1 <= k <= Y.shape[0]:
        raise DomainError(f"K must be in [1, {Y.shape[0]}], got {k}")
    inv_cov = None
    if metric == "mahalanobis":
        cov = np.atleast_2d(np.cov(Y, rowvar=False)) if Y.shape[0] > 1 else np.eye(Y.shape[1])
        inv_cov = np.linalg.pinv(cov)
    return KnnModel(classes, Y.copy(), idx, int(k), metric, inv_cov)


def knn_predict(model, y):
    return model.predict(np.atleast_2d(y))[0]
