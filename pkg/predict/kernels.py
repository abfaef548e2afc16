"""Limiting random-matrix kernels."""
import numpy as np


def kernel_symplectic(x):
    """1 - sin(2 pi x)/(2 pi x), the one-level density of a symplectic family."""
    return 1.0 - np.sinc(2 * np.asarray(x, dtype=np.float64))


def kernel_gue_pc(t):
    """1 - (sin(pi t)/(pi t))^2, the GUE pair correlation."""
    return 1.0 - np.sinc(np.asarray(t, dtype=np.float64)) ** 2
