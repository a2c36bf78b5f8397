"""Pure-NumPy kernel-evaluation core, API-compatible with ``okreg._ckern``."""

import numpy as np

SOB01 = 1
FERMI = 2
SOBR = 3
TRIANGULAR = 4
CONSTANT = 5
ZERO = 6

_SINH1 = np.sinh(1.0)


def _k1(code, param, s, t):
    """Elementwise 1-d kernel value; s, t broadcastable arrays."""
    if code == SOB01:
        return np.cosh(np.minimum(s, t)) * np.cosh(np.minimum(1.0 - s, 1.0 - t)) / _SINH1
    if code == FERMI:
        a = np.minimum(s, t)
        b = np.minimum(1.0 - s, 1.0 - t)
        return 0.5 * a * a + 0.5 * b * b + 5.0 / 6.0
    if code == SOBR:
        return 0.5 * np.exp(-np.abs(s - t))
    if code == TRIANGULAR:
        return param * param * np.maximum(1.0 - np.abs(s - t), 0.0)
    if code == CONSTANT:
        return np.full(np.broadcast(s, t).shape, float(param))
    return np.zeros(np.broadcast(s, t).shape)


def pair(code, param, x, y):
    """Kernel value at a single pair of m-vectors."""
    return float(np.prod(_k1(code, param, x, y)))


def cross(code, param, x, X):
    """Vector of kernel values k(x, X[i]) for every row of X."""
    if X.shape[0] == 0:
        return np.empty(0)
    return np.prod(_k1(code, param, x[None, :], X), axis=1)


def gram(code, param, X):
    """Gram matrix over the rows of X; upper triangle computed, then mirrored."""
    full = np.prod(_k1(code, param, X[:, None, :], X[None, :, :]), axis=2)
    upper = np.triu(full)
    return upper + np.triu(full, 1).T
