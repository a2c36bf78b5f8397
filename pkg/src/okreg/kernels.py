"""Kernel catalog: closed-form kernels, evaluation bounds, Gram matrices.

Built-in kernels carry their analytic sup-diagonal bound c_k; user-supplied
kernels must declare one explicitly, since every downstream guarantee is
invalid under a wrong bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import backend


class KernelError(ValueError):
    """Bad kernel construction or evaluation request."""


def as_point(x, dimension: int) -> np.ndarray:
    """Coerce a scalar or sequence to a contiguous float64 m-vector."""
    p = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))
    if p.ndim != 1 or p.shape[0] != dimension:
        raise KernelError(f"point of dimension {p.shape} does not match kernel dimension {dimension}")
    return p


def as_points(points, dimension: int) -> np.ndarray:
    """Coerce a sequence of points to an (n, m) contiguous float64 array."""
    if len(points) == 0:
        return np.empty((0, dimension))
    arr = np.ascontiguousarray(np.asarray([as_point(p, dimension) for p in points], dtype=np.float64))
    return arr


@dataclass(frozen=True)
class Kernel:
    """Evaluable symmetric positive-definite function with its bound c_k.

    ``code``/``param`` select a built-in closed form handled by the compiled
    or NumPy evaluation core; ``evaluator`` holds a user-supplied pair
    function instead (code 0).
    """

    name: str
    dimension: int
    bound: float
    code: int = 0
    param: float = 0.0
    unit_domain: bool = False
    evaluator: Optional[Callable[[np.ndarray, np.ndarray], float]] = None

    def _check_domain(self, pts: np.ndarray) -> None:
        if self.unit_domain and pts.size and (pts.min() < 0.0 or pts.max() > 1.0):
            raise KernelError(f"kernel {self.name!r} is defined on [0,1]^{self.dimension}; "
                              "got a point outside it")

    def __call__(self, x, y) -> float:
        xp = as_point(x, self.dimension)
        yp = as_point(y, self.dimension)
        self._check_domain(xp)
        self._check_domain(yp)
        if self.code:
            return backend.pair(self.code, self.param, xp, yp)
        return float(self.evaluator(xp, yp))

    def cross(self, x, X: np.ndarray) -> np.ndarray:
        """Vector k(x, X[i]) over the rows of X (assumed already validated)."""
        xp = as_point(x, self.dimension)
        self._check_domain(xp)
        X = np.ascontiguousarray(X, dtype=np.float64)
        if self.code:
            return backend.cross(self.code, self.param, xp, X)
        return np.array([float(self.evaluator(xp, row)) for row in X])

    def diag(self, x) -> float:
        return self(x, x)


@dataclass(frozen=True)
class GramMatrix:
    """Kernel Gram matrix together with the points it was evaluated at."""

    entries: np.ndarray
    points: np.ndarray


@dataclass(frozen=True)
class ForecastKernel:
    """Kernel on (prediction, object) pairs: a0*mu*mu' + a1*base(x, x').

    a0 = 0 is the plain-kernel configuration in which the prediction
    coordinate is ignored.
    """

    a0: float
    a1: float
    base: Kernel
    Y: float

    def __call__(self, mu, x, mu_p, x_p) -> float:
        return self.a0 * mu * mu_p + self.a1 * self.base(x, x_p)

    def gram(self, mus: np.ndarray, points: np.ndarray) -> np.ndarray:
        mus = np.asarray(mus, dtype=np.float64)
        kx = gram(self.base, points).entries
        return self.a0 * np.outer(mus, mus) + self.a1 * kx


# ---------------------------------------------------------------------------
# built-in kernels
# ---------------------------------------------------------------------------

def sobolev01() -> Kernel:
    """First-order Sobolev kernel on [0,1]: cosh(min) cosh(min of flips) / sinh 1."""
    return Kernel("sobolev01", 1, math.sqrt(1.0 / math.tanh(1.0)), code=backend.SOB01,
                  unit_domain=True)


def fermi_sobolev() -> Kernel:
    """Fermi-Sobolev kernel on [0,1] (Bernoulli-polynomial closed form)."""
    return Kernel("fermi-sobolev", 1, 2.0 / math.sqrt(3.0), code=backend.FERMI,
                  unit_domain=True)


def sobolev_r() -> Kernel:
    """First-order Sobolev kernel on the real line: exp(-|t-t'|)/2."""
    return Kernel("sobolev-r", 1, 1.0 / math.sqrt(2.0), code=backend.SOBR)


def triangular(c: float) -> Kernel:
    """Triangular-bump kernel c^2 * max(1-|t-t'|, 0) with scale parameter c."""
    if c <= 0:
        raise KernelError("triangular kernel scale must be positive")
    return Kernel(f"triangular:{c:g}", 1, float(c), code=backend.TRIANGULAR, param=float(c))


def constant(v: float) -> Kernel:
    """Constant kernel k = v (v >= 0)."""
    if v < 0:
        raise KernelError("constant kernel value must be nonnegative")
    return Kernel(f"constant:{v:g}", 1, math.sqrt(v), code=backend.CONSTANT, param=float(v))


def zero() -> Kernel:
    """Identically-zero kernel."""
    return Kernel("zero", 1, 0.0, code=backend.ZERO)


def custom(name: str, evaluator, dimension: int, bound: Optional[float] = None,
           unit_domain: bool = False) -> Kernel:
    """User kernel; an explicit bound c_k = sup sqrt(k(x,x)) is mandatory."""
    if bound is None:
        raise KernelError("user-supplied kernels must declare their bound c_k explicitly; "
                          "pass bound=sup_x sqrt(k(x,x))")
    if bound < 0:
        raise KernelError("kernel bound must be nonnegative")
    return Kernel(name, dimension, float(bound), evaluator=evaluator, unit_domain=unit_domain)


def tensor_power(base: Kernel, m: int) -> Kernel:
    """m-fold product kernel on m-vectors; its bound is base.bound**m."""
    if m < 1:
        raise KernelError("tensor power requires m >= 1")
    if base.dimension != 1:
        raise KernelError("tensor power is defined for 1-d base kernels")
    if m == 1:
        return base
    if base.code:
        return Kernel(f"tensor:{base.name}:{m}", m, base.bound ** m, code=base.code,
                      param=base.param, unit_domain=base.unit_domain)

    def ev(x, y, _b=base.evaluator):
        v = 1.0
        for d in range(m):
            v *= _b(x[d:d + 1], y[d:d + 1])
        return v

    return Kernel(f"tensor:{base.name}:{m}", m, base.bound ** m, evaluator=ev,
                  unit_domain=base.unit_domain)


def gram(kernel: Kernel, points) -> GramMatrix:
    """Gram matrix over a point sequence; exactly symmetric by mirroring."""
    pts = points if isinstance(points, np.ndarray) and points.ndim == 2 \
        else as_points(list(points), kernel.dimension)
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    kernel._check_domain(pts)
    if kernel.code:
        entries = backend.gram(kernel.code, kernel.param, pts)
    else:
        n = pts.shape[0]
        entries = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                entries[i, j] = kernel.evaluator(pts[i], pts[j])
                entries[j, i] = entries[i, j]
    return GramMatrix(entries, pts)


def is_numerically_psd(entries: np.ndarray, rel_tol: float = 1e-8) -> bool:
    """PSD check: symmetric eigensolve up to 512x512, jittered Cholesky beyond."""
    n = entries.shape[0]
    if n == 0:
        return True
    scale = float(np.max(np.diag(entries)))
    if n <= 512:
        w = np.linalg.eigvalsh(0.5 * (entries + entries.T))
        return bool(w.min() >= -rel_tol * max(scale, 0.0) - 1e-300)
    try:
        np.linalg.cholesky(entries + 1e-10 * max(scale, 1.0) * np.eye(n))
        return True
    except np.linalg.LinAlgError:
        return False


def merge_forecast(base: Kernel, Y: float, a0: Optional[float] = None,
                   a1: float = 1.0) -> ForecastKernel:
    """Forecast kernel a0*mu*mu' + a1*base(x,x'); defaults a1=1, a0=1/Y^2."""
    if Y <= 0:
        raise KernelError("Y must be positive")
    if a0 is None:
        a0 = 1.0 / (Y * Y)
    if a0 <= 0 or a1 <= 0:
        raise KernelError("forecast-kernel weights a0, a1 must be positive")
    return ForecastKernel(float(a0), float(a1), base, float(Y))


# ---------------------------------------------------------------------------
# kernel selection strings
# ---------------------------------------------------------------------------

def parse_kernel(spec: str) -> Kernel:
    """Parse a kernel selection string.

    Grammar: ``sobolev01`` | ``fermi-sobolev`` | ``sobolev-r`` |
    ``triangular:<c>`` | ``tensor:<base>:<m>`` | ``constant:<v>`` | ``zero``.
    """
    s = spec.strip()
    if s == "sobolev01":
        return sobolev01()
    if s == "fermi-sobolev":
        return fermi_sobolev()
    if s == "sobolev-r":
        return sobolev_r()
    if s == "zero":
        return zero()
    if s.startswith("triangular:"):
        return triangular(float(s.split(":", 1)[1]))
    if s.startswith("constant:"):
        return constant(float(s.split(":", 1)[1]))
    if s.startswith("tensor:"):
        body = s[len("tensor:"):]
        base_str, m_str = body.rsplit(":", 1)
        return tensor_power(parse_kernel(base_str), int(m_str))
    raise KernelError(f"unknown kernel string {spec!r}")
