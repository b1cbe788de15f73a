"""Kernel dispatch: compiled extension when importable, NumPy otherwise.

Set ``TERASENSE_BACKEND=python`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
if os.environ.get("TERASENSE_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
else:
    _impl = _fallback

lbl_absorption = _impl.lbl_absorption
tsne_grad = _impl.tsne_grad
bpnn_epoch = _impl.bpnn_epoch
svm_pegasos = _impl.svm_pegasos

__all__ = ["BACKEND", "lbl_absorption", "tsne_grad", "bpnn_epoch", "svm_pegasos"]
