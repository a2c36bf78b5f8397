"""Numeric evaluators for every regret expression and the risk bound.

The Kummer-U/Gamma expression is evaluated by log-domain adaptive quadrature
of its integral representation (the Gamma prefactor cancels), which stays
finite for N up to 1e5 where naive evaluation underflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class BoundInputs:
    """Shared inputs of the bound evaluators, with range validation."""

    Y: float
    c: float = 0.0
    d: float = 0.0
    N: int = 0
    lossD: float = 0.0
    delta: float = 0.25

    def __post_init__(self):
        if self.Y <= 0:
            raise ValueError("Y must be positive")
        if self.c < 0 or self.d < 0 or self.N < 0 or self.lossD < 0:
            raise ValueError("c, d, N, lossD must be nonnegative")
        if not 0.0 < self.delta <= 0.5:
            raise ValueError("delta must lie in (0, 1/2]")


def regret_thm1(Y: float, c: float, d: float, N: int) -> float:
    """Square-root-of-N regret term: 2Y sqrt(c^2+1) (d+Y) sqrt(N)."""
    return 2.0 * Y * math.sqrt(c * c + 1.0) * (d + Y) * math.sqrt(N)


def regret_thm2(Y: float, c: float, d: float, lossD: float) -> float:
    """Comparator-loss-based regret term; with B = sqrt(c^2+1)(d+Y):
    2B sqrt(lossD + B^2) + 2B^2."""
    B = math.sqrt(c * c + 1.0) * (d + Y)
    return 2.0 * B * math.sqrt(lossD + B * B) + 2.0 * B * B


# ---------------------------------------------------------------------------
# Kummer-U based exact bound
# ---------------------------------------------------------------------------

_LOG_WINDOW = 40.0  # integrate where g(t) - g(t*) >= -40


def _g_parts(N: int, dd: float):
    a = N / 2.0 + 1.0
    z = dd * dd / 2.0

    def g(t):
        return -z * t + (a - 1.0) * np.log(t) - (a + 1.0) * np.log1p(t)

    # maximizer: z t^2 + (z + 2) t - (a - 1) = 0, positive root
    tstar = (-(z + 2.0) + math.sqrt((z + 2.0) ** 2 + 4.0 * z * (a - 1.0))) / (2.0 * z)
    return g, tstar


def _window(g, tstar: float) -> Tuple[float, float]:
    gstar = g(tstar)
    lo = tstar
    while lo > 1e-290 and g(lo) > gstar - _LOG_WINDOW:
        lo *= 0.5
    hi = tstar * 2.0 + 1.0
    while g(hi) > gstar - _LOG_WINDOW:
        hi *= 2.0
    return lo, hi


def kummer_f(N: int, dd: float) -> float:
    """-ln of the Gamma(N/2+1)-weighted Kummer U value at (N/2+1, 0, dd^2/2).

    Computed as -ln int_0^inf exp(g(t)) dt with
    g(t) = -z t + (a-1) ln t - (a+1) ln(1+t), a = N/2+1, z = dd^2/2;
    the Gamma prefactor of the integral representation cancels exactly.
    """
    if N < 1:
        raise ValueError("N must be a positive integer")
    if dd <= 0:
        raise ValueError("dd must be positive (the dd=0 limit is handled by callers)")
    g, tstar = _g_parts(N, dd)
    gstar = float(g(tstar))
    lo, hi = _window(g, tstar)
    val, _err = integrate.quad(lambda t: math.exp(float(g(t)) - gstar), lo, hi,
                               points=[tstar], limit=200, epsabs=0.0, epsrel=1e-9)
    return -(gstar + math.log(val))


def kummer_f_simpson(N: int, dd: float, nodes: int = 1_000_000) -> float:
    """Independent fixed-step Simpson oracle over the same window."""
    g, tstar = _g_parts(N, dd)
    gstar = float(g(tstar))
    lo, hi = _window(g, tstar)
    if nodes % 2 == 0:
        nodes += 1
    t = np.linspace(lo, hi, nodes)
    val = integrate.simpson(np.exp(g(t) - gstar), x=t)
    return -(gstar + math.log(float(val)))


def kummer_f_laplace(N: int, dd: float) -> float:
    """Saddle-point approximation -g(t*) - ln sqrt(2 pi / |g''(t*)|)."""
    g, tstar = _g_parts(N, dd)
    a = N / 2.0 + 1.0
    gpp = -(a - 1.0) / tstar ** 2 + (a + 1.0) / (1.0 + tstar) ** 2
    return -float(g(tstar)) - 0.5 * math.log(2.0 * math.pi / abs(gpp))


def regret_thm3_exact(Y: float, c: float, d: float, N: int) -> float:
    """Exact ln-Gamma-U regret term 2 Y^2 f(N, c d / Y); rejects c*d = 0."""
    if c * d <= 0:
        raise ValueError("c*d must be positive; use the max-form fallback for c*d = 0")
    return 2.0 * Y * Y * kummer_f(N, c * d / Y)


def regret_thm3_asymptotic(Y: float, c: float, d: float, N: int,
                           delta: float = 0.25) -> float:
    """Asymptotic form, reported WITHOUT its unknown O(Y^2) term; reporting
    only, never asserted."""
    if not 0.0 < delta <= 0.5:
        raise ValueError("delta must lie in (0, 1/2]")
    lead = max(c * d, Y * delta * N ** (-0.5 + delta))
    return 2.0 * Y * lead * math.sqrt(N + 2.0) + 1.5 * Y * Y * math.log(N) \
        + c * c * d * d / 4.0


def lower_bound_thm4(Y: float, c: float, d: float, N: int) -> float:
    """Adversarial lower bound 2 Y c d sqrt(N) - c^2 d^2; requires
    d <= (Y/c) sqrt(N)."""
    if c > 0 and d > (Y / c) * math.sqrt(N) * (1.0 + 1e-12):
        raise ValueError(f"d={d} exceeds the cap (Y/c)*sqrt(N)={(Y / c) * math.sqrt(N)}")
    return 2.0 * Y * c * d * math.sqrt(N) - c * c * d * d


def risk_bound_cor2(Y: float, c: float, d: float, N: int, delta: float) -> float:
    """High-probability excess-risk term of the averaged rule:
    (2Y/sqrt(N)) (sqrt(c^2+1)(d+Y) + 2Y sqrt(2 ln(2/delta)))."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if N < 1:
        raise ValueError("N must be positive")
    return (2.0 * Y / math.sqrt(N)) * (
        math.sqrt(c * c + 1.0) * (d + Y) + 2.0 * Y * math.sqrt(2.0 * math.log(2.0 / delta)))


def figure1_grid(n_max: int = 100, d_lo: float = 1.0, d_hi: float = 3.0,
                 d_step: float = 0.05) -> Iterator[Tuple[int, float, float]]:
    """Yield (N, d, f(N, d)) over N = 1..n_max and d in [d_lo, d_hi]."""
    n_d = int(round((d_hi - d_lo) / d_step)) + 1
    ds = [d_lo + i * d_step for i in range(n_d)]
    for N in range(1, n_max + 1):
        for d in ds:
            yield N, d, kummer_f(N, d)


# Claims from the underlying theory that no desk-scale run can assert;
# covered instead by the property suites and reference-only bound reporting.
NOT_REPRODUCIBLE_AT_DESK_SCALE = (
    "asymptotic universal consistency (a limit statement over N -> infinity; "
    "no finite run can verify it)",
    "the exact ln-Gamma-U regret bound for a concrete predictor (the "
    "continuous ridge mixture behind it is non-constructive; the finite "
    "2^k grid predictor is certified through its own grid guarantee and the "
    "exact bound is reported as an unasserted reference column)",
)
