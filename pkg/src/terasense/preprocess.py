"""Per-spectrum pre-treatment: SNV, min-max scaling, Savitzky-Golay smoothing.

Every function takes a 1-D spectrum or a 2-D array of spectra (one per row)
and returns an array of the same shape.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateDataError, DomainError

DEGENERATE_STD = 1e-15


def _rows(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2):
        raise DomainError(f"expected a 1-D or 2-D array, got {x.ndim}-D")
    if x.shape[-1] < 2:
        raise DomainError("spectra need at least 2 points")
    return x


def snv(x):
    """Standard normal variate: centre each spectrum and divide by its sample std."""
    x = _rows(x)
    mean = x.mean(axis=-1, keepdims=True)
    std = x.std(axis=-1, ddof=1, keepdims=True)
    if np.any(std < DEGENERATE_STD):
        raise DegenerateDataError("constant spectrum has zero variance")
    return (x - mean) / std


def minmax(x):
    x = _rows(x)
    lo = x.min(axis=-1, keepdims=True)
    span = x.max(axis=-1, keepdims=True) - lo
    if np.any(span == 0):
        raise DegenerateDataError("constant spectrum has zero range")
    return (x - lo) / span


@dataclass(frozen=True)
class SGWindow:
    half_width: int = 5
    poly_degree: int = 3

    def __post_init__(self):
        if self.half_width < 1:
            raise DomainError(f"half width must be >= 1, got {self.half_width}")
        if self.poly_degree < 0:
            raise DomainError(f"polynomial degree must be >= 0, got {self.poly_degree}")
        if self.poly_degree >= self.length:
            raise DomainError(f"degree {self.poly_degree} needs a window longer than {self.length}")

    @property
    def length(self):
        return 2 * self.half_width + 1


def _fit_weights(length, degree, pos):
    """Weights that evaluate the least-squares polynomial fit at ``pos``."""
    x = np.arange(length, dtype=np.float64) - (length - 1) / 2.0
    A = np.vander(x, degree + 1, increasing=True)
    v = (pos - (length - 1) / 2.0) ** np.arange(degree + 1)
    return v @ np.linalg.pinv(A)


def sg_weights(w):
    """Centre-point smoothing weights of a window (symmetric convolution kernel)."""
    return _fit_weights(w.length, w.poly_degree, w.half_width)


@lru_cache(maxsize=32)
def _filter_matrix(n, m, p):
    L = 2 * m + 1
    F = np.zeros((n, n))
    centre = _fit_weights(L, p, m)
    for i in range(m, n - m):
        F[i, i - m:i + m + 1] = centre
    # edges: the full-length window pushed against the boundary, evaluated off-centre
    for i in range(m):
        F[i, :L] = _fit_weights(L, p, i)
        F[n - 1 - i, n - L:] = _fit_weights(L, p, L - 1 - i)
    F.setflags(write=False)
    return F


def savitzky_golay(x, w=SGWindow()):
    """Least-squares polynomial smoothing; edge points use one-sided windows."""
    x = _rows(x)
    n = x.shape[-1]
    if n < w.length:
        raise DomainError(f"window of {w.length} points exceeds spectrum length {n}")
    F = _filter_matrix(n, w.half_width, w.poly_degree)
    return x @ F.T


def apply(x, method, window=SGWindow()):
    """Dispatch by name: ``snv``, ``minmax``, ``sg`` or ``none``."""
    if method in (None, "none"):
        return np.asarray(x, dtype=np.float64)
    if method == "snv":
        return snv(x)
    if method == "minmax":
        return minmax(x)
    if method == "sg":
        return savitzky_golay(x, window)
    raise DomainError(f"unknown preprocessing method {method!r}")
