"""Benchmark prediction rules as finite kernel expansions.

A comparator is D(x) = sum_i c_i k(z_i, x) with RKHS norm sqrt(c' K_z c);
the hindsight ridge oracle places one center per transcript point with
coefficients (K + lambda I)^{-1} y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .game import GameTranscript
from .kernels import Kernel, as_points, gram, parse_kernel


@dataclass(frozen=True)
class Comparator:
    """Finite kernel expansion with cached RKHS norm."""

    kernel: Kernel
    centers: np.ndarray  # (k, m)
    coeffs: np.ndarray   # (k,)
    norm: float
    label: str = ""

    def __call__(self, x) -> float:
        return eval_comparator(self, x)

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        """D at each row of X; vectorized over the expansion centers."""
        if self.centers.shape[0] == 0:
            return np.zeros(X.shape[0])
        out = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            out[i] = float(self.kernel.cross(X[i], self.centers) @ self.coeffs)
        return out

    def scaled_to(self, target_norm: float, label: str = "") -> "Comparator":
        """Rescale coefficients so the norm becomes target_norm (norm > 0 required)."""
        if self.norm <= 0:
            raise ValueError("cannot rescale a zero-norm comparator")
        f = target_norm / self.norm
        return Comparator(self.kernel, self.centers, self.coeffs * f,
                          target_norm, label or self.label)


def expansion(kernel: Kernel, centers, coeffs, label: str = "") -> Comparator:
    """Comparator from centers and coefficients; norm from the Gram quadratic form."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    pts = as_points(list(centers), kernel.dimension)
    if pts.shape[0] != coeffs.shape[0]:
        raise ValueError(f"{pts.shape[0]} centers but {coeffs.shape[0]} coefficients")
    k_z = gram(kernel, pts).entries
    sq = float(coeffs @ k_z @ coeffs)
    if sq < 0:
        if sq < -1e-10:
            raise ValueError(f"negative norm^2 = {sq}: kernel is not positive definite "
                             "at these centers")
        sq = 0.0
    return Comparator(kernel, pts, coeffs, math.sqrt(sq), label)


def eval_comparator(D: Comparator, x) -> float:
    """D(x) = sum_i c_i k(z_i, x)."""
    if D.centers.shape[0] == 0:
        return 0.0
    return float(D.kernel.cross(x, D.centers) @ D.coeffs)


def comparator_loss(D: Comparator, transcript: GameTranscript) -> float:
    """Cumulative square loss of D on the transcript."""
    if len(transcript) == 0:
        return 0.0
    vals = D.eval_many(transcript.points)
    return float(((np.asarray(transcript.ys) - vals) ** 2).sum())


def clip_eval(D: Comparator, x, Y: float) -> float:
    """Evaluation-level clipping of D to [-Y, Y] for loss comparisons."""
    return min(Y, max(-Y, eval_comparator(D, x)))


def hindsight_ridge(kernel: Kernel, transcript: GameTranscript, lam: float,
                    label: str = "") -> Comparator:
    """Representer-oracle comparator: coefficients solve (K + lam I) c = y."""
    if lam <= 0:
        raise ValueError("ridge parameter must be positive")
    pts = transcript.points
    y = np.asarray(transcript.ys)
    if pts.shape[0] == 0:
        return Comparator(kernel, np.empty((0, kernel.dimension)), np.empty(0), 0.0, label)
    K = gram(kernel, pts).entries
    n = K.shape[0]
    try:
        coeffs = scipy.linalg.solve(K + lam * np.eye(n), y, assume_a="pos")
    except scipy.linalg.LinAlgError:
        coeffs = scipy.linalg.solve(K + (lam + 1e-10 * lam) * np.eye(n), y, assume_a="pos")
    return expansion(kernel, pts, coeffs, label or f"ridge:{lam:g}")


# ---------------------------------------------------------------------------
# serialization: header line with the kernel string, then `coeff,x1,...,xm`
# ---------------------------------------------------------------------------

def comparator_to_text(D: Comparator) -> str:
    lines = [D.kernel.name]
    for c, z in zip(D.coeffs, D.centers):
        lines.append(",".join([repr(float(c))] + [repr(float(v)) for v in z]))
    return "\n".join(lines) + "\n"


def comparator_from_text(text: str) -> Comparator:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty comparator text")
    kernel = parse_kernel(lines[0])
    coeffs, centers = [], []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 1 + kernel.dimension:
            raise ValueError(f"malformed comparator line {lineno}: {ln!r}")
        coeffs.append(float(parts[0]))
        centers.append([float(v) for v in parts[1:]])
    return expansion(kernel, centers, coeffs)


# ---------------------------------------------------------------------------
# averaged rule: mean of the online predictor's snapshot rules
# ---------------------------------------------------------------------------

class AveragedRule:
    """Mean of the snapshot rules H_1..H_N of a defensive online predictor.

    Stores the predictor configuration plus the training prefix and replays
    deterministically; H_n(x) is the prediction after training on the first
    n-1 examples, so the rule's value is always in [-Y, Y] by convexity.
    """

    def __init__(self, variant: str, base_kernel: Kernel, Y: float,
                 examples: Sequence[Tuple[np.ndarray, float]],
                 a0: Optional[float] = None, a1: float = 1.0,
                 tau: Optional[float] = None):
        from . import defensive

        if len(examples) < 1:
            raise ValueError("averaging needs at least one training example")
        self.variant = variant
        self.base = base_kernel
        self.Y = float(Y)
        self.examples = list(examples)
        state = defensive.new_state(variant, base_kernel, Y, a0, a1, tau)
        for x, y in self.examples:
            state.predict(x)
            state.observe(x, y)
        self.a0, self.a1, self.tau = state.a0, state.a1, state.tau
        self._pts = state._points()
        resid = np.asarray(state.ys) - np.asarray(state.mus)
        self._resid = resid
        # prefix sums over i < n: A_n and the per-query B_n share the layout
        mu_resid = np.asarray(state.mus) * resid
        self._A = np.concatenate([[0.0], np.cumsum(mu_resid)[:-1]])
        self.final_state = state

    @property
    def n_snapshots(self) -> int:
        return len(self.examples)

    def __call__(self, x) -> float:
        return float(self.eval_many(np.atleast_2d(np.asarray(x, dtype=np.float64)))[0])

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        """Averaged predictions at each row of X, fully vectorized."""
        from . import defensive

        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        Q, N = X.shape[0], len(self.examples)
        kxx = np.array([self.base.diag(X[q]) for q in range(Q)])
        C = np.empty((Q, N))
        for q in range(Q):
            C[q] = self.base.cross(X[q], self._pts)
        cr = C * self._resid[None, :]
        B = self.a1 * np.concatenate(
            [np.zeros((Q, 1)), np.cumsum(cr, axis=1)[:, :-1]], axis=1)
        A = np.broadcast_to(self._A[None, :], (Q, N))
        mus = _roots_grid(self.variant, self.Y, self.tau, self.a0, self.a1,
                          A, B, kxx[:, None])
        return mus.mean(axis=1)


def _roots_grid(variant: str, Y: float, tau: float, a0: float, a1: float,
                A: np.ndarray, B: np.ndarray, kxx: np.ndarray) -> np.ndarray:
    """Vectorized root rule for S(mu) = a0*A*mu + B [- (a0 mu^2 + a1 kxx) mu].

    Same endpoint/zero conventions as the scalar predictor; used for bulk
    snapshot evaluation where the scalar path would be too slow.
    """
    aln = variant == "aln"
    shape = np.broadcast(A, B, kxx).shape
    # S(mu) = lin*mu + B - aln*a0*mu^3 with lin = a0*A [- a1*kxx under aln]
    lin = a0 * A - (a1 * kxx if aln else 0.0)
    lin = np.broadcast_to(lin, shape)
    B = np.broadcast_to(B, shape)

    def S(mu):
        s = lin * mu + B
        if aln:
            s -= a0 * mu * mu * mu
        return s

    s_lo = S(np.full(shape, -Y))
    s_hi = S(np.full(shape, Y))
    zero_mask = np.ones(shape, dtype=bool)
    for p in np.linspace(-Y, Y, 5):
        zero_mask &= np.abs(S(np.full(shape, p))) <= tau
    out = np.empty(shape)
    out[(s_lo > 0) & (s_hi > 0)] = Y
    out[(s_lo < 0) & (s_hi < 0)] = -Y
    bis = ~(((s_lo > 0) & (s_hi > 0)) | ((s_lo < 0) & (s_hi < 0)))
    lo = np.full(shape, -Y)
    hi = np.full(shape, Y)
    lo_pos = s_lo > 0
    # 52 halvings bring the bracket width under 2Y * 2^-52, float resolution
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        same = (S(mid) > 0) == lo_pos
        np.copyto(lo, mid, where=same)
        np.copyto(hi, mid, where=~same)
    out[bis] = (0.5 * (lo + hi))[bis]
    out[zero_mask] = 0.0
    return np.clip(out, -Y, Y)


def averaged_rule(variant: str, base_kernel: Kernel, Y: float, examples,
                  a0: Optional[float] = None, a1: float = 1.0,
                  tau: Optional[float] = None) -> AveragedRule:
    """Averaging construction over the first N training pairs."""
    return AveragedRule(variant, base_kernel, Y, examples, a0, a1, tau)
