"""Defensive forecasting predictors.

Two variants share one state type: "aln" subtracts the (a0*mu^2 + a1*k(x,x))*mu
term from the betting function S_n, "k29" does not.  Each prediction is a
sign-checked bisection root of S_n on [-Y, Y], so the opponent's capital
cannot grow beyond the root tolerance, which is what the post-hoc
certificates verify as Gram quadratic forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .comparators import Comparator
from .game import GameTranscript, ProtocolError
from .kernels import Kernel, as_point

ALN = "aln"
K29 = "k29"

MAX_BISECT = 200


def default_tolerance(base_kernel: Kernel) -> float:
    return 1e-12 * max(1.0, base_kernel.bound ** 2)


class PredictorState:
    """One online defensive predictor: variant, merged-kernel weights, history.

    a0 = 0 selects the plain-kernel configuration in which S_n depends on x
    only; it is the setup under which the resolution inequality is asserted.
    """

    def __init__(self, variant: str, base_kernel: Kernel, Y: float,
                 a0: Optional[float] = None, a1: float = 1.0,
                 tau: Optional[float] = None):
        if variant not in (ALN, K29):
            raise ValueError(f"unknown variant {variant!r}")
        if Y <= 0:
            raise ValueError("Y must be positive")
        if a0 is None:
            a0 = 1.0 / (Y * Y)
        if a0 < 0 or a1 < 0 or a0 + a1 == 0:
            raise ValueError("kernel weights must be nonnegative and not both zero")
        if tau is None:
            tau = default_tolerance(base_kernel)
        if tau <= 0:
            raise ValueError("root tolerance must be positive")
        self.variant = variant
        self.base = base_kernel
        self.Y = float(Y)
        self.a0 = float(a0)
        self.a1 = float(a1)
        self.tau = float(tau)
        self.xs: List[np.ndarray] = []
        self.mus: List[float] = []
        self.ys: List[float] = []
        self._sum_mu_resid = 0.0  # running sum of mu_i * (y_i - mu_i)
        self._pending: Optional[Tuple[np.ndarray, float]] = None

    @property
    def round(self) -> int:
        return len(self.ys)

    def _points(self) -> np.ndarray:
        if not self.xs:
            return np.empty((0, self.base.dimension))
        return np.ascontiguousarray(np.stack(self.xs))

    def _s_coeffs(self, x) -> Tuple[float, float, float]:
        """Coefficients (A, B, kxx) with S(mu) = a0*A*mu + B [- (a0 mu^2 + a1 kxx) mu]."""
        xp = as_point(x, self.base.dimension)
        kxx = self.base.diag(xp)
        if self.xs:
            kvec = self.base.cross(xp, self._points())
            resid = np.asarray(self.ys) - np.asarray(self.mus)
            B = self.a1 * float(kvec @ resid)
        else:
            B = 0.0
        return self._sum_mu_resid, B, kxx

    def s_function(self, x, mu: float) -> float:
        """The betting function S_n evaluated at a candidate prediction mu."""
        A, B, kxx = self._s_coeffs(x)
        return self._s_eval(mu, A, B, kxx)

    def _s_eval(self, mu: float, A: float, B: float, kxx: float) -> float:
        s = self.a0 * A * mu + B
        if self.variant == ALN:
            s -= (self.a0 * mu * mu + self.a1 * kxx) * mu
        return s

    def predict(self, x) -> float:
        """Root of S_n on [-Y, Y]; endpoint when S_n has constant sign."""
        xp = as_point(x, self.base.dimension)
        A, B, kxx = self._s_coeffs(xp)
        mu = self._root(A, B, kxx)
        self._pending = (xp, mu)
        return mu

    def _root(self, A: float, B: float, kxx: float) -> float:
        Y, tau = self.Y, self.tau
        probe = np.linspace(-Y, Y, 5)
        if all(abs(self._s_eval(p, A, B, kxx)) <= tau for p in probe):
            return 0.0
        lo, hi = -Y, Y
        s_lo = self._s_eval(lo, A, B, kxx)
        s_hi = self._s_eval(hi, A, B, kxx)
        if abs(s_lo) <= tau:
            return lo
        if abs(s_hi) <= tau:
            return hi
        if s_lo > 0 and s_hi > 0:
            return Y
        if s_lo < 0 and s_hi < 0:
            return -Y
        mid = 0.0
        for _ in range(MAX_BISECT):
            mid = 0.5 * (lo + hi)
            s_mid = self._s_eval(mid, A, B, kxx)
            if abs(s_mid) <= tau:
                return mid
            if (s_mid > 0) == (s_lo > 0):
                lo, s_lo = mid, s_mid
            else:
                hi = mid
        return mid  # interval exhausted at float resolution

    def observe(self, x, y: float) -> None:
        """Record the revealed label; requires predict() for this round first."""
        if self._pending is None:
            raise ProtocolError("observe() called before predict() this round")
        if abs(y) > self.Y:
            raise ProtocolError(f"label {y} outside [-Y, Y] with Y={self.Y}")
        xp, mu = self._pending
        xq = as_point(x, self.base.dimension)
        if not np.array_equal(xp, xq):
            raise ProtocolError("observe() object differs from the predicted one")
        self.xs.append(xq)
        self.mus.append(mu)
        self.ys.append(float(y))
        self._sum_mu_resid += mu * (y - mu)
        self._pending = None


def new_state(variant: str, base_kernel: Kernel, Y: float,
              a0: Optional[float] = None, a1: float = 1.0,
              tau: Optional[float] = None) -> PredictorState:
    """Fresh predictor state; defaults a1 = 1, a0 = 1/Y^2, tau = 1e-12*max(1, c_k^2)."""
    return PredictorState(variant, base_kernel, Y, a0, a1, tau)


@dataclass(frozen=True)
class DefensiveCertificate:
    """Realized capital-control inequality, lhs <= rhs + slack_allowance."""

    lhs: float
    rhs: float
    slack_allowance: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.slack_allowance


def certificate(transcript: GameTranscript, base_kernel: Kernel, Y: float,
                a0: Optional[float] = None, a1: float = 1.0, variant: str = ALN,
                tau: Optional[float] = None) -> DefensiveCertificate:
    """Post-hoc defensive certificate, computed as merged-kernel Gram forms.

    lhs = r' Kt r with r the residual vector and Kt the merged Gram over
    (mu_n, x_n); rhs sums (Y^2 - mu_n^2) Kt_nn for "aln" and r_n^2 Kt_nn for
    "k29".  The allowance 4*N*tau*Y covers the capital leak of approximate
    roots.
    """
    if a0 is None:
        a0 = 1.0 / (Y * Y)
    if tau is None:
        tau = default_tolerance(base_kernel)
    n = len(transcript)
    if n == 0:
        return DefensiveCertificate(0.0, 0.0, 0.0)
    mus = np.asarray(transcript.mus)
    resid = transcript.residuals
    from .kernels import gram as kgram

    ktilde = a0 * np.outer(mus, mus) + a1 * kgram(base_kernel, transcript.points).entries
    lhs = float(resid @ ktilde @ resid)
    diag = np.diag(ktilde)
    if variant == ALN:
        rhs = float(((Y * Y - mus * mus) * diag).sum())
    else:
        rhs = float((resid * resid * diag).sum())
    return DefensiveCertificate(lhs, rhs, 4.0 * n * tau * Y)


def resolution_check(transcript: GameTranscript, base_kernel: Kernel, Y: float,
                     D: Comparator, tau: Optional[float] = None) -> Tuple[float, float]:
    """Resolution inequality for plain-kernel runs:

    |sum (y_n - mu_n) D(x_n)| <= Y * c_k * ||D|| * sqrt(N) (+ root-slack allowance).
    """
    if tau is None:
        tau = default_tolerance(base_kernel)
    n = len(transcript)
    if n == 0:
        return 0.0, 0.0
    dvals = D.eval_many(transcript.points)
    lhs = abs(float(transcript.residuals @ dvals))
    rhs = Y * base_kernel.bound * D.norm * math.sqrt(n)
    return lhs, rhs


def resolution_allowance(n: int, tau: float, Y: float, norm_d: float) -> float:
    """Additive slack for the resolution inequality under approximate roots."""
    return norm_d * math.sqrt(max(4.0 * n * tau * Y, 0.0))
