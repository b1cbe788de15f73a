"""Terahertz spectral synthesis, chemometric classification and carrier-based sensing."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
