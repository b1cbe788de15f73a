from dataclasses import dataclass

import numpy as np

from .base import Classifier, check_features, encode_labels

VAR_FLOOR = 1e-9


@dataclass(frozen=True)
class GnbModel(Classifier):
    classes: np.ndarray
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    @property
    def n_features(self):
        return self.means.shape[1]

    def log_joint(self, Y):
        Y = check_features(Y, self.n_features)
        ll = -0.5 * (np.log(2.0 * np.pi * self.variances)[None, :, :]
                     + (Y[:, None, :] - self.means[None, :, :]) ** 2 / self.variances[None, :, :])
        return np.log(self.priors)[None, :] + ll.sum(axis=2)

    def scores(self, Y):
        """Normalised posteriors."""
        lj = self.log_joint(Y)
        lj -= lj.max(axis=1, keepdims=True)
        p = np.exp(lj)
        return p / p.sum(axis=1, keepdims=True)


def gnb_fit(Y, labels, var_floor=VAR_FLOOR):
    """Class priors from frequencies, per-feature Gaussian likelihoods.

    Variances are floored at ``var_floor`` times the largest feature variance.
    """
    Y = check_features(Y)
    classes, idx = encode_labels(labels)
    k = classes.size
    counts = np.bincount(idx, minlength=k).astype(np.float64)
    means = np.stack([Y[idx == c].mean(axis=0) for c in range(k)])
    variances = np.stack([Y[idx == c].var(axis=0) for c in range(k)])
    scale = float(Y.var(axis=0).max())
    floor = var_floor * (scale if scale > 0 else 1.0)
    return GnbModel(classes, counts / counts.sum(), means, np.maximum(variances, floor))


def gnb_predict(model, y):
    return model.predict_one(y)
