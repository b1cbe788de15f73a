"""Single-hidden-layer sigmoid network trained by per-sample backpropagation.

A constant input (and a constant hidden unit) act as biases.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import DivergenceError, DomainError
from .base import Classifier, check_features, encode_labels


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _augment(X):
    return np.hstack([X, np.ones((X.shape[0], 1))])


@dataclass(frozen=True)
class BpnnModel(Classifier):
    classes: np.ndarray
    input_weights: np.ndarray    # (hidden, features + 1)
    output_weights: np.ndarray   # (classes, hidden + 1)
    learning_rate: float = 0.01
    epochs: int = 0
    seed: int = 0
    loss_history: tuple = ()

    @property
    def hidden(self):
        return self.input_weights.shape[0]

    @property
    def n_features(self):
        return self.input_weights.shape[1] - 1

    def forward(self, Y):
        Y = check_features(Y, self.n_features)
        Z = sigmoid(_augment(Y) @ self.input_weights.T)
        return Z, sigmoid(_augment(Z) @ self.output_weights.T)

    def scores(self, Y):
        return self.forward(Y)[1]


def squared_error(W1, W2, X, T):
    """0.5 * sum of squared output errors over all samples."""
    Z = sigmoid(_augment(X) @ W1.T)
    O = sigmoid(_augment(Z) @ W2.T)
    return 0.5 * float(np.sum((O - T) ** 2))


def gradients(W1, W2, X, T):
    """Analytic gradient of :func:`squared_error` w.r.t. both weight matrices."""
    Xa = _augment(X)
    Z = sigmoid(Xa @ W1.T)
    Za = _augment(Z)
    O = sigmoid(Za @ W2.T)
    d_out = (O - T) * O * (1.0 - O)
    d_hid = (d_out @ W2[:, :-1]) * Z * (1.0 - Z)
    return d_hid.T @ Xa, d_out.T @ Za


def bpnn_fit(Y, labels, hidden=10, lr=0.01, epochs=500, seed=0, tol=0.0, init_scale=0.5):
    """Fit by seeded per-sample gradient descent on squared error.

    With ``tol`` > 0 training stops early once the epoch loss improves by
    less than ``tol`` (relative) over 10 consecutive epochs.
    """
    Y = check_features(Y)
    classes, idx = encode_labels(labels)
    if hidden < 1:
        raise DomainError(f"hidden size must be >= 1, got {hidden}")
    if not lr > 0:
        raise DomainError(f"learning rate must be > 0, got {lr}")
    rng = np.random.default_rng(seed)
    D = Y.shape[1] + 1
    W1 = rng.uniform(-init_scale, init_scale, size=(hidden, D)) / np.sqrt(D)
    W2 = rng.uniform(-init_scale, init_scale, size=(classes.size, hidden + 1)) / np.sqrt(hidden + 1)
    X = np.ascontiguousarray(_augment(Y))
    T = np.ascontiguousarray(np.eye(classes.size)[idx])
    history = []
    for epoch in range(int(epochs)):
        order = rng.permutation(X.shape[0])
        sse = kernels.bpnn_epoch(X, T, W1, W2, order, float(lr))
        if not (np.isfinite(sse) and np.all(np.isfinite(W1)) and np.all(np.isfinite(W2))):
            raise DivergenceError("non-finite loss during training", epoch=epoch + 1)
        history.append(sse)
        if tol > 0 and len(history) > 10 and history[-11] - history[-1] < tol * history[-11]:
            break
    return BpnnModel(classes, W1, W2, float(lr), len(history), int(seed), tuple(history))


def bpnn_predict(model, y):
    return model.predict_one(y)
