"""Aggregating-algorithm predictors.

KaarState is the kernel ridge-type online predictor whose regret is governed
by the a*||D||^2 + Y^2 logdet(I + K/a) guarantee; GridMixture merges one such
predictor per ridge value on a 2^k grid with the square-loss aggregating rule
at eta = 1/(2 Y^2), paying 2 Y^2 ln(grid size) for not knowing a in advance.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from .game import ProtocolError
from .kernels import Kernel, as_point, gram

REFRESH_LIMIT = 256  # full re-factorization below, appended-row update above


class FactorizationError(RuntimeError):
    """Cholesky factorization failed even after the jitter retry."""


def _chol(M: np.ndarray, jitter: float) -> np.ndarray:
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        try:
            return np.linalg.cholesky(M + jitter * np.eye(M.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise FactorizationError("Gram matrix numerically not PSD") from exc


class KaarState:
    """Online ridge predictor on the kernel Gram, query row included with a
    zero pseudo-label; predictions are clipped to [-Y, Y].

    Keeps the Cholesky factor of (aI + K_n); refreshed from scratch while
    n <= REFRESH_LIMIT, extended by one row beyond that.
    """

    def __init__(self, kernel: Kernel, a: float, Y: float,
                 refresh_limit: int = REFRESH_LIMIT):
        if a <= 0:
            raise ValueError("ridge parameter a must be positive")
        if Y <= 0:
            raise ValueError("Y must be positive")
        self.kernel = kernel
        self.a = float(a)
        self.Y = float(Y)
        self.refresh_limit = refresh_limit
        self.xs: List[np.ndarray] = []
        self.ys: List[float] = []
        self._K = np.empty((0, 0))   # history Gram
        self._L = np.empty((0, 0))   # chol(aI + K)
        self._z = np.empty(0)        # L^{-1} y

    @property
    def round(self) -> int:
        return len(self.ys)

    def _points(self) -> np.ndarray:
        if not self.xs:
            return np.empty((0, self.kernel.dimension))
        return np.ascontiguousarray(np.stack(self.xs))

    def predict(self, x) -> float:
        """Solve (aI + Kbar) c = (y, 0) over history plus the query point and
        return the clipped kernel-column combination at the query."""
        xp = as_point(x, self.kernel.dimension)
        n = self.round
        kxx = self.kernel.diag(xp)
        if n == 0:
            return 0.0
        kvec = self.kernel.cross(xp, self._points())
        # extend the factor by the query row: Lbar = [[L, 0], [w', s]]
        w = scipy.linalg.solve_triangular(self._L, kvec, lower=True)
        dsq = self.a + kxx - float(w @ w)
        if dsq <= 0:
            dsq = self.a * 1e-10
        s = math.sqrt(dsq)
        # forward: Lbar zbar = (y, 0); backward: Lbar' c = zbar
        z2 = (0.0 - float(w @ self._z)) / s
        c_last = z2 / s
        c_head = scipy.linalg.solve_triangular(
            self._L.T, self._z - w * c_last, lower=False)
        mu = float(c_head @ kvec + c_last * kxx)
        return float(np.clip(mu, -self.Y, self.Y))

    def observe(self, x, y: float) -> None:
        if abs(y) > self.Y:
            raise ProtocolError(f"label {y} outside [-Y, Y] with Y={self.Y}")
        xp = as_point(x, self.kernel.dimension)
        kvec = self.kernel.cross(xp, self._points()) if self.xs else np.empty(0)
        kxx = self.kernel.diag(xp)
        self.xs.append(xp)
        self.ys.append(float(y))
        n = self.round
        K = np.empty((n, n))
        K[:n - 1, :n - 1] = self._K
        K[n - 1, :n - 1] = kvec
        K[:n - 1, n - 1] = kvec
        K[n - 1, n - 1] = kxx
        self._K = K
        if n <= self.refresh_limit:
            self._refactor()
        else:
            self._extend(kvec, kxx)

    def _refactor(self) -> None:
        n = self.round
        self._L = _chol(self.a * np.eye(n) + self._K, 1e-10 * self.a)
        self._z = scipy.linalg.solve_triangular(self._L, np.asarray(self.ys), lower=True)

    def _extend(self, kvec: np.ndarray, kxx: float) -> None:
        L_old, z_old = self._L, self._z
        n = self.round
        w = scipy.linalg.solve_triangular(L_old, kvec, lower=True)
        dsq = self.a + kxx - float(w @ w)
        if dsq <= 0:
            self._refactor()
            return
        s = math.sqrt(dsq)
        L = np.zeros((n, n))
        L[:n - 1, :n - 1] = L_old
        L[n - 1, :n - 1] = w
        L[n - 1, n - 1] = s
        self._L = L
        self._z = np.concatenate([z_old, [(self.ys[-1] - float(w @ z_old)) / s]])


def kaar_predict(state: KaarState, x) -> float:
    return state.predict(x)


def kaar_observe(state: KaarState, x, y: float) -> None:
    state.observe(x, y)


def bound_32(Y: float, a: float, norm_d: float, gram_entries: np.ndarray) -> float:
    """Regret guarantee a*||D||^2 + Y^2 * logdet(I + K/a) over the realized points."""
    if a <= 0:
        raise ValueError("ridge parameter a must be positive")
    n = gram_entries.shape[0] if gram_entries.size else 0
    val = a * norm_d * norm_d
    if n:
        L = _chol(np.eye(n) + gram_entries / a, 1e-14)
        val += Y * Y * 2.0 * float(np.log(np.diag(L)).sum())
    return val


# ---------------------------------------------------------------------------
# square-loss aggregating rule over finitely many experts
# ---------------------------------------------------------------------------

def _logsumexp(v: np.ndarray) -> float:
    m = float(np.max(v))
    return m + math.log(float(np.exp(v - m).sum()))


def aa_substitute(predictions: Sequence[float], weights: Sequence[float], Y: float) -> float:
    """Merge expert predictions: mu = (g(-Y) - g(Y)) / (4Y), clipped, where
    g(y) = -(1/eta) ln sum_k w_k exp(-eta (y - p_k)^2) and eta = 1/(2 Y^2)."""
    p = np.asarray(predictions, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if p.size == 0:
        raise ValueError("empty expert list")
    eta = 1.0 / (2.0 * Y * Y)
    logw = np.log(w)

    def g(y):
        return -_logsumexp(logw - eta * (y - p) ** 2) / eta

    mu = (g(-Y) - g(Y)) / (4.0 * Y)
    return float(np.clip(mu, -Y, Y))


def aa_update(weights: Sequence[float], predictions: Sequence[float], y: float,
              eta: float) -> np.ndarray:
    """Exponential-weights update w_k <- w_k exp(-eta (y - p_k)^2), normalized;
    all arithmetic in the log domain."""
    w = np.asarray(weights, dtype=np.float64)
    p = np.asarray(predictions, dtype=np.float64)
    logw = np.log(w) - eta * (y - p) ** 2
    logw -= _logsumexp(logw)
    return np.exp(logw)


class GridMixture:
    """One KaarState per ridge value, merged with the aggregating rule.

    Default grid a_k = 2^k * Y^2, k = -8..8 (17 experts, uniform prior).
    """

    def __init__(self, kernel: Kernel, Y: float, grid: Optional[Sequence[float]] = None,
                 kmin: int = -8, kmax: int = 8):
        if grid is None:
            grid = [2.0 ** k * Y * Y for k in range(kmin, kmax + 1)]
        grid = [float(a) for a in grid]
        if not grid or any(a <= 0 for a in grid):
            raise ValueError("grid must be a nonempty list of positive ridge values")
        self.Y = float(Y)
        self.grid = grid
        self.eta = 1.0 / (2.0 * Y * Y)
        self.experts = [KaarState(kernel, a, Y) for a in grid]
        self.log_weights = np.full(len(grid), -math.log(len(grid)))
        self._pending: Optional[np.ndarray] = None

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def predict(self, x) -> float:
        preds = np.array([e.predict(x) for e in self.experts])
        self._pending = preds
        return aa_substitute(preds, self.weights, self.Y)

    def observe(self, x, y: float) -> None:
        preds = self._pending if self._pending is not None \
            else np.array([e.predict(x) for e in self.experts])
        logw = self.log_weights - self.eta * (y - preds) ** 2
        self.log_weights = logw - _logsumexp(logw)
        for e in self.experts:
            e.observe(x, y)
        self._pending = None


def grid_mixture(kernel: Kernel, Y: float, grid: Optional[Sequence[float]] = None,
                 kmin: int = -8, kmax: int = 8) -> GridMixture:
    return GridMixture(kernel, Y, grid, kmin, kmax)
