"""Pure NumPy versions of the hot kernels.

Each function mirrors the signature of its compiled twin in ``_kernels.pyx``
and must return the same values to rounding error.
"""

import numpy as np


def lbl_absorption(freqs, centers, halfwidths, amplitudes, beta, cutoffs):
    """Sum truncated Van Vleck-Weisskopf profiles of many lines on a sorted grid."""
    freqs = np.asarray(freqs, dtype=np.float64)
    out = np.zeros_like(freqs)
    tanh_f = np.tanh(beta * freqs)
    for fc, w, amp, cut in zip(centers, halfwidths, amplitudes, cutoffs):
        if amp == 0.0:
            continue
        lo = np.searchsorted(freqs, fc - cut, side="left")
        hi = np.searchsorted(freqs, fc + cut, side="right")
        if hi <= lo:
            continue
        f = freqs[lo:hi]
        w2 = w * w
        shape = (w * f / (np.pi * fc)) * (1.0 / ((f - fc) ** 2 + w2) + 1.0 / ((f + fc) ** 2 + w2))
        out[lo:hi] += amp * shape * (f / fc) * (tanh_f[lo:hi] / np.tanh(beta * fc))
    return out


def tsne_grad(P, Y, with_cost=False):
    """Exact t-SNE gradient (and optionally the KL cost) for joint affinities ``P``."""
    sq = np.sum(Y * Y, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (Y @ Y.T), 0.0)
    num = 1.0 / (1.0 + d2)
    np.fill_diagonal(num, 0.0)
    Q = num / np.sum(num)
    PQ = (P - Q) * num
    grad = 4.0 * (np.sum(PQ, axis=1)[:, None] * Y - PQ @ Y)
    if not with_cost:
        return grad, np.nan
    mask = P > 0
    cost = float(np.sum(P[mask] * np.log(P[mask] / np.maximum(Q[mask], 1e-300))))
    return grad, cost


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def bpnn_epoch(X, T, W1, W2, order, lr):
    """One pass of per-sample backpropagation; updates ``W1``/``W2`` in place.

    ``X`` carries a trailing constant column; the hidden layer gets one
    appended to ``z`` for the output bias. Returns the summed squared error
    of the forward passes seen during the epoch.
    """
    H = W1.shape[0]
    sse = 0.0
    z_aug = np.ones(H + 1)
    for idx in order:
        x = X[idx]
        z = _sigmoid(W1 @ x)
        z_aug[:H] = z
        o = _sigmoid(W2 @ z_aug)
        err = o - T[idx]
        sse += 0.5 * float(err @ err)
        d_out = err * o * (1.0 - o)
        d_hid = (W2[:, :H].T @ d_out) * z * (1.0 - z)
        W2 -= lr * np.outer(d_out, z_aug)
        W1 -= lr * np.outer(d_hid, x)
    return sse


def _primal(X, y, a, b, c):
    margins = y * (X @ a + b)
    return 0.5 * float(a @ a) + c * float(np.sum(np.maximum(0.0, 1.0 - margins)))


def svm_pegasos(X, y, c, orders):
    """Per-sample sub-gradient descent on the soft-margin primal.

    The bias is carried as an extra weight on a constant feature during the
    updates. ``orders`` is an (epochs, n) index array. Returns the iterate
    with the smallest primal objective seen at epoch ends, starting from zero.
    """
    n, d = X.shape
    lam = 1.0 / (c * n)
    a = np.zeros(d)
    b = 0.0
    best_a, best_b = a.copy(), b
    best_obj = _primal(X, y, a, b, c)
    radius = 1.0 / np.sqrt(lam)
    t = 0
    for order in orders:
        for idx in order:
            t += 1
            eta = 1.0 / (lam * t)
            margin = y[idx] * (X[idx] @ a + b)
            a *= 1.0 - eta * lam
            b *= 1.0 - eta * lam
            if margin < 1.0:
                a += eta * y[idx] * X[idx]
                b += eta * y[idx]
            norm = np.sqrt(a @ a + b * b)
            if norm > radius:
                a *= radius / norm
                b *= radius / norm
        obj = _primal(X, y, a, b, c)
        if obj < best_obj:
            best_obj, best_a, best_b = obj, a.copy(), b
    return best_a, best_b, best_obj
