from dataclasses import dataclass

import numpy as np

from ..features.pls import PlsModel, one_hot, pls_fit
from .base import Classifier, check_features, encode_labels


@dataclass(frozen=True)
class PlsDaModel(Classifier):
    classes: np.ndarray
    pls: PlsModel

    @property
    def n_features(self):
        return self.pls.x_mean.size

    def scores(self, Y):
        """Regressed one-hot scores; rows need not sum to one."""
        return self.pls.predict(check_features(Y, self.n_features))


def plsda_fit(Y, labels, n_components=None):
    """PLS regression onto one-hot targets.

    ``n_components`` defaults to one fewer than the class count, the rank of
    the centred target matrix.
    """
    Y = check_features(Y)
    classes, idx = encode_labels(labels, min_classes=2)
    P = classes.size - 1 if n_components is None else int(n_components)
    P = min(P, Y.shape[0] - 1, Y.shape[1])
    return PlsDaModel(classes, pls_fit(Y, one_hot(idx, np.arange(classes.size)), P))


def plsda_predict(model, y):
    return model.predict(np.atleast_2d(y))[0]
