"""Blind separation of cardiorespiratory sound mixtures.

Nonnegative matrix factorization with an alpha-divergence cost, a
periodicity-aware multilayer variant with an affine nonnegativity shift,
and an advisor-tuned dominant-frequency penalty, plus the metrics and sweep
harnesses used to compare them.
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
