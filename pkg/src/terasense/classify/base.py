import numpy as np

from ..errors import DomainError
from ..features.base import as_matrix


def encode_labels(labels, min_classes=1):
    """Sorted unique classes and the per-sample index into them."""
    labels = np.asarray(labels).ravel()
    classes, idx = np.unique(labels, return_inverse=True)
    if classes.size < min_classes:
        raise DomainError(f"need at least {min_classes} classes, got {classes.size}")
    return classes, idx


def check_features(Y, n_features=None):
    Y = as_matrix(Y, "features")
    if n_features is not None and Y.shape[1] != n_features:
        raise DomainError(f"model expects {n_features} features, got {Y.shape[1]}")
    return Y


def as_query(y, n_features):
    """Accept one feature vector or a matrix; return (matrix, was_single)."""
    y = np.asarray(y, dtype=np.float64)
    single = y.ndim == 1
    return check_features(np.atleast_2d(y), n_features), single


class Classifier:
    """Mixin: subclasses provide ``classes``, ``n_features`` and ``scores``.

    ``argmax`` picks the first maximum, so ties go to the lowest class.
    """

    def predict(self, Y):
        S = self.scores(Y)
        return self.classes[np.argmax(S, axis=1)]

    def predict_one(self, y):
        """Class and score vector for a single feature vector."""
        s = self.scores(np.atleast_2d(np.asarray(y, dtype=np.float64)))[0]
        return self.classes[int(np.argmax(s))], s
