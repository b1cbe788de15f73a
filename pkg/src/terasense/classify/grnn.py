import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .base import Classifier, check_features, encode_labels


@dataclass(frozen=True)
class GrnnModel(Classifier):
    """Gaussian-kernel regression onto one-hot targets (one pattern unit per sample)."""

    classes: np.ndarray
    train: np.ndarray
    targets: np.ndarray
    spread: float = 10.0

    def __post_init__(self):
        if not self.spread > 0:
            raise DomainError(f"spread must be > 0, got {self.spread}")

    @property
    def n_features(self):
        return self.train.shape[1]

    def scores(self, Y):
        Y = check_features(Y, self.n_features)
        T = self.train
        d2 = np.maximum(np.sum(Y * Y, 1)[:, None] + np.sum(T * T, 1)[None, :] - 2.0 * Y @ T.T, 0.0)
        rbf = np.exp(-d2 / (2.0 * self.spread ** 2))
        total = rbf.sum(axis=1)
        out = np.empty((Y.shape[0], self.targets.shape[1]))
        ok = total > 0
        out[ok] = (rbf[ok] @ self.targets) / total[ok, None]
        if not np.all(ok):
            warnings.warn(
                f"{int(np.count_nonzero(~ok))} GRNN queries underflowed; using nearest training sample",
                RuntimeWarning,
                stacklevel=2,
            )
            out[~ok] = self.targets[np.argmin(d2[~ok], axis=1)]
        return out


def grnn_fit(Y, labels, spread=10.0):
    Y = check_features(Y)
    classes, idx = encode_labels(labels)
    targets = np.eye(classes.size)[idx]
    return GrnnModel(classes, Y.copy(), targets, float(spread))


def grnn_predict(model, y):
    return model.predict_one(y)
