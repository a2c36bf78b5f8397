"""End-to-end game driving: predictor factory, Reality strategies, audits.

A game is strictly sequential (predict, then observe); the audit assembles
per-comparator bound rows and defensive certificates into a RegretReport
whose asserted rows must satisfy slack >= -allowance.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import aggregating, bounds, comparators, defensive
from .game import GameTranscript, ProtocolError
from .kernels import Kernel, gram, parse_kernel

# fixed stream ids for master-seed splitting; appending new ids never
# perturbs existing streams
_STREAM_SYNTH = 1
_STREAM_BATTERY = 2
_STREAM_COR2 = 3
_STREAM_SUITE = 4


def derived_rng(master_seed: int, *stream) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(stream)))


class _Always0:
    def predict(self, x):
        return 0.0

    def observe(self, x, y):
        pass


def make_predictor(algorithm: str, kernel: Kernel, Y: float, tau: Optional[float] = None):
    """Predictor from an algorithm selection string.

    Strings: ``aln`` | ``k29`` | ``aln-plain`` | ``kaar:<a>`` |
    ``aa-grid[:kmin:kmax]`` | ``always0``.
    """
    s = algorithm.strip()
    if s == "aln":
        return defensive.new_state(defensive.ALN, kernel, Y, tau=tau)
    if s == "k29":
        return defensive.new_state(defensive.K29, kernel, Y, tau=tau)
    if s == "aln-plain":
        return defensive.new_state(defensive.ALN, kernel, Y, a0=0.0, a1=1.0, tau=tau)
    if s.startswith("kaar:"):
        return aggregating.KaarState(kernel, float(s.split(":", 1)[1]), Y)
    if s == "aa-grid":
        return aggregating.GridMixture(kernel, Y)
    if s.startswith("aa-grid:"):
        _, kmin, kmax = s.split(":")
        return aggregating.GridMixture(kernel, Y, kmin=int(kmin), kmax=int(kmax))
    if s == "always0":
        return _Always0()
    raise ValueError(f"unknown algorithm string {algorithm!r}")


def run_game(algorithm: str, kernel_str: str, Y: float,
             reality: Iterable[Tuple[np.ndarray, float]],
             seed: Optional[int] = None, tau: Optional[float] = None) -> GameTranscript:
    """Play predict/observe over a (x, y) source and return the transcript."""
    kernel = parse_kernel(kernel_str)
    predictor = make_predictor(algorithm, kernel, Y, tau)
    t = GameTranscript(algorithm, kernel_str, Y, seed)
    for x, y in reality:
        if abs(y) > Y:
            raise ProtocolError(f"label {y} outside [-Y, Y] at round {len(t) + 1}")
        mu = predictor.predict(x)
        predictor.observe(x, y)
        t.append(x, mu, y)
    return t


def run_mixed_game(algorithm: str, kernel_str: str, Y: float, N: int, seed: int,
                   flip_prob: float = 0.3, tau: Optional[float] = None) -> GameTranscript:
    """Game where Reality mixes iid labels with adversarial label flips
    (y = -Y sign(mu)), exercising the worst case the certificates cover."""
    kernel = parse_kernel(kernel_str)
    predictor = make_predictor(algorithm, kernel, Y, tau)
    rng = derived_rng(seed, _STREAM_SUITE)
    t = GameTranscript(algorithm, kernel_str, Y, seed)
    lo, hi = (0.0, 1.0) if kernel.unit_domain else (-1.0, 1.0)
    for _ in range(N):
        x = rng.uniform(lo, hi, size=kernel.dimension)
        mu = predictor.predict(x)
        if rng.random() < flip_prob:
            y = Y if mu == 0 else -Y * math.copysign(1.0, mu)
        else:
            y = float(np.clip(Y * math.sin(4.0 * x[0]) + 0.3 * Y * rng.standard_normal(),
                              -Y, Y))
        predictor.observe(x, y)
        t.append(x, mu, y)
    return t


# ---------------------------------------------------------------------------
# Reality strategy of the lower-bound adversary
# ---------------------------------------------------------------------------

def adversary_thm4(algorithm: str, c: float, Y: float, N: int, d: float,
                   tau: Optional[float] = None):
    """Lower-bound adversary: x_n = 2n, y_n = -Y sign(mu_n) (ties: +Y), with the
    matched triangular-bump comparator of norm d.

    Returns (transcript, comparator, check record).  Requires
    0 < d <= (Y/c) sqrt(N).
    """
    cap = (Y / c) * math.sqrt(N)
    if not 0 < d <= cap * (1.0 + 1e-12):
        raise ValueError(f"d={d} outside (0, (Y/c)*sqrt(N)={cap}]")
    kernel_str = f"triangular:{c!r}"  # repr: the scale must survive reparsing exactly
    kernel = parse_kernel(kernel_str)
    predictor = make_predictor(algorithm, kernel, Y, tau)
    t = GameTranscript(algorithm, kernel_str, Y, None)
    for n in range(1, N + 1):
        x = np.array([2.0 * n])
        mu = predictor.predict(x)
        y = Y if mu == 0 else -Y * math.copysign(1.0, mu)
        predictor.observe(x, y)
        t.append(x, mu, y)
    alpha = c * d / (Y * math.sqrt(N))
    centers = t.points
    coeffs = alpha * np.asarray(t.ys) / (c * c)
    D = comparators.expansion(kernel, centers, coeffs, label=f"adversarial:{d:g}")
    comp_loss = comparators.comparator_loss(D, t)
    lower = bounds.lower_bound_thm4(Y, c, d, N)
    record = {
        "predictor_loss": t.cumloss,
        "comparator_loss": comp_loss,
        "comparator_loss_expected": (1.0 - alpha) ** 2 * Y * Y * N,
        "norm": D.norm,
        "norm_expected": d,
        "excess": t.cumloss - comp_loss,
        "lower_bound": lower,
        "alpha": alpha,
        "loss_floor_ok": t.cumloss >= Y * Y * N - 1e-9,
        "excess_ok": t.cumloss - comp_loss >= lower - 1e-9 * max(1.0, abs(lower)),
    }
    return t, D, record


# ---------------------------------------------------------------------------
# comparator battery
# ---------------------------------------------------------------------------

RESCALE_NORMS = (0.5, 1.0, 2.0, 5.0)
RIDGE_LAMBDAS = (0.1, 1.0, 10.0)


def build_battery(kernel: Kernel, transcript: GameTranscript, Y: float,
                  master_seed: int = 0, n_random: int = 10,
                  max_centers: int = 10) -> List[comparators.Comparator]:
    """Random expansions with rescaled norms plus hindsight ridge comparators."""
    rng = derived_rng(master_seed, _STREAM_BATTERY)
    lo, hi = (0.0, 1.0) if kernel.unit_domain else (-1.0, 1.0)
    battery: List[comparators.Comparator] = []
    for i in range(n_random):
        k = int(rng.integers(1, max_centers + 1))
        centers = rng.uniform(lo, hi, size=(k, kernel.dimension))
        coeffs = rng.standard_normal(k)
        D = comparators.expansion(kernel, centers, coeffs, label=f"random:{i}")
        target = RESCALE_NORMS[i % len(RESCALE_NORMS)]
        if D.norm > 0:
            D = D.scaled_to(target, label=f"random:{i}:norm={target:g}")
        battery.append(D)
    if len(transcript) > 0:
        for lam in RIDGE_LAMBDAS:
            battery.append(comparators.hindsight_ridge(kernel, transcript, lam,
                                                       label=f"ridge:{lam:g}"))
    return battery


# ---------------------------------------------------------------------------
# regret report
# ---------------------------------------------------------------------------

@dataclass
class ReportRow:
    comparator: str
    norm: float
    comparator_loss: float
    predictor_loss: float
    bound_name: str
    bound_value: float
    slack: float
    allowance: float
    asserted: bool
    ref_thm3_exact: Optional[float] = None
    ref_thm3_asymptotic: Optional[float] = None

    @property
    def ok(self) -> bool:
        return (not self.asserted) or self.slack >= -self.allowance


@dataclass
class CertRow:
    name: str
    lhs: float
    rhs: float
    allowance: float
    asserted: bool = True

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return (not self.asserted) or self.lhs <= self.rhs + self.allowance


@dataclass
class RegretReport:
    algorithm: str
    kernel: str
    Y: float
    rows: List[ReportRow] = field(default_factory=list)
    cert_rows: List[CertRow] = field(default_factory=list)

    @property
    def violations(self) -> List[str]:
        bad = [r.comparator for r in self.rows if not r.ok]
        bad += [c.name for c in self.cert_rows if not c.ok]
        return bad

    @property
    def ok(self) -> bool:
        return not self.violations

    def table(self) -> str:
        buf = io.StringIO()
        buf.write(f"algorithm={self.algorithm} kernel={self.kernel} Y={self.Y}\n")
        hdr = (f"{'comparator':<24}{'norm':>9}{'comp loss':>12}{'pred loss':>12}"
               f"{'bound':>16}{'value':>12}{'slack':>12}  status\n")
        buf.write(hdr)
        for r in self.rows:
            status = ("ok" if r.ok else "VIOLATED") if r.asserted else "reference"
            buf.write(f"{r.comparator:<24}{r.norm:>9.4g}{r.comparator_loss:>12.5g}"
                      f"{r.predictor_loss:>12.5g}{r.bound_name:>16}{r.bound_value:>12.5g}"
                      f"{r.slack:>12.5g}  {status}\n")
        for c in self.cert_rows:
            status = "ok" if c.ok else "VIOLATED"
            buf.write(f"[cert] {c.name}: lhs={c.lhs:.6g} rhs={c.rhs:.6g} "
                      f"allowance={c.allowance:.3g}  {status}\n")
        return buf.getvalue()

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("comparator,norm,comparator_loss,predictor_loss,bound_name,"
                  "bound_value,slack,allowance,asserted,ref_thm3_exact,"
                  "ref_thm3_asymptotic\n")
        for r in self.rows:
            e = "" if r.ref_thm3_exact is None else repr(r.ref_thm3_exact)
            a = "" if r.ref_thm3_asymptotic is None else repr(r.ref_thm3_asymptotic)
            buf.write(f"{r.comparator},{r.norm!r},{r.comparator_loss!r},"
                      f"{r.predictor_loss!r},{r.bound_name},{r.bound_value!r},"
                      f"{r.slack!r},{r.allowance!r},{int(r.asserted)},{e},{a}\n")
        for c in self.cert_rows:
            buf.write(f"cert:{c.name},,,,certificate,{c.rhs!r},{c.slack!r},"
                      f"{c.allowance!r},{int(c.asserted)},,\n")
        return buf.getvalue()


def _parse_algorithm_tag(algorithm: str):
    s = algorithm.strip()
    if s in ("aln", "k29", "aln-plain"):
        return s, None
    if s.startswith("kaar:"):
        return "kaar", float(s.split(":", 1)[1])
    if s == "aa-grid":
        return "aa-grid", (-8, 8)
    if s.startswith("aa-grid:"):
        _, kmin, kmax = s.split(":")
        return "aa-grid", (int(kmin), int(kmax))
    return "unknown", None


def audit(transcript: GameTranscript, kernel_str: Optional[str] = None,
          Y: Optional[float] = None,
          battery: Optional[Sequence[comparators.Comparator]] = None,
          master_seed: int = 0, tau: Optional[float] = None) -> RegretReport:
    """Assemble the per-comparator bound table and defensive certificates.

    Bounds are asserted only where the implemented predictor carries the
    matching guarantee; unknown algorithm tags get a report-only table.
    """
    kernel = parse_kernel(kernel_str or transcript.kernel)
    Y = float(Y if Y is not None else transcript.Y)
    if tau is None:
        tau = defensive.default_tolerance(kernel)
    if battery is None:
        battery = build_battery(kernel, transcript, Y, master_seed)
    tag, tag_arg = _parse_algorithm_tag(transcript.algorithm)
    n = len(transcript)
    c = kernel.bound
    pred_loss = transcript.cumloss
    defensive_allowance = 4.0 * n * tau * Y
    report = RegretReport(transcript.algorithm, kernel.name, Y)

    gram_entries = None
    if tag in ("kaar", "aa-grid") and n:
        gram_entries = gram(kernel, transcript.points).entries

    for D in battery:
        comp_loss = comparators.comparator_loss(D, transcript)
        d = D.norm
        ref_exact = None
        if c * d > 0 and n > 0:
            ref_exact = bounds.regret_thm3_exact(Y, c, d, n)
        ref_asym = bounds.regret_thm3_asymptotic(Y, c, d, n) if n > 0 else None
        if tag == "aln":
            name, value = "thm1", bounds.regret_thm1(Y, c, d, n)
            allowance, asserted = defensive_allowance, True
        elif tag == "k29":
            name, value = "thm2", bounds.regret_thm2(Y, c, d, comp_loss)
            allowance, asserted = defensive_allowance, True
        elif tag == "aln-plain":
            # the sqrt(N) regret bound needs the merged kernel; report only
            name, value = "thm1", bounds.regret_thm1(Y, c, d, n)
            allowance, asserted = 0.0, False
        elif tag == "kaar":
            name = f"logdet:a={tag_arg:g}"
            value = aggregating.bound_32(Y, tag_arg, d, gram_entries) if n else tag_arg * d * d
            allowance = 1e-8 * max(1.0, abs(value) + comp_loss + pred_loss)
            asserted = True
        elif tag == "aa-grid":
            kmin, kmax = tag_arg
            grid = [2.0 ** k * Y * Y for k in range(kmin, kmax + 1)]
            best = min(aggregating.bound_32(Y, a, d, gram_entries) if n else a * d * d
                       for a in grid)
            name = "logdet-grid"
            value = best + 2.0 * Y * Y * math.log(len(grid))
            allowance = 1e-8 * max(1.0, abs(value) + comp_loss + pred_loss)
            asserted = True
        else:
            name, value = "thm1", bounds.regret_thm1(Y, c, d, n)
            allowance, asserted = 0.0, False
        slack = comp_loss + value - pred_loss
        report.rows.append(ReportRow(D.label or "comparator", d, comp_loss, pred_loss,
                                     name, value, slack, allowance, asserted,
                                     ref_exact, ref_asym))

    if tag in ("aln", "k29", "aln-plain"):
        variant = defensive.K29 if tag == "k29" else defensive.ALN
        a0 = 0.0 if tag == "aln-plain" else 1.0 / (Y * Y)
        cert = defensive.certificate(transcript, kernel, Y, a0=a0, a1=1.0,
                                     variant=variant, tau=tau)
        report.cert_rows.append(CertRow(f"defensive:{variant}", cert.lhs, cert.rhs,
                                        cert.slack_allowance))
        if tag == "aln-plain":
            for D in battery:
                lhs, rhs = defensive.resolution_check(transcript, kernel, Y, D, tau)
                allow = defensive.resolution_allowance(n, tau, Y, D.norm)
                report.cert_rows.append(
                    CertRow(f"resolution:{D.label}", lhs, rhs, allow))
    return report


# ---------------------------------------------------------------------------
# data ingestion and synthesis
# ---------------------------------------------------------------------------

def ingest_csv(path) -> List[Tuple[np.ndarray, float]]:
    """Parse `x1,...,xm,y` CSV into (x, y) pairs; m inferred from the header."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[-1] != "y" or not all(h == f"x{i + 1}" for i, h in enumerate(header[:-1])):
        raise ValueError(f"{path}: bad header {lines[0]!r}; expected x1,...,xm,y")
    m = len(header) - 1
    pairs = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != m + 1:
            raise ValueError(f"{path}: malformed line {lineno}: {ln!r}")
        try:
            vals = [float(v) for v in parts]
        except ValueError as exc:
            raise ValueError(f"{path}: malformed line {lineno}: {ln!r}") from exc
        pairs.append((np.array(vals[:m]), vals[m]))
    return pairs


_SMOOTH_CENTERS = (0.15, 0.4, 0.65, 0.9)
_SMOOTH_COEFFS = (0.35, -0.3, 0.25, -0.2)


def synth_target(kernel: Kernel, Y: float) -> comparators.Comparator:
    """Fixed small expansion used as the `uniform-smooth` regression target."""
    centers = np.array([[c] * kernel.dimension for c in _SMOOTH_CENTERS])
    coeffs = Y * np.asarray(_SMOOTH_COEFFS)
    return comparators.expansion(kernel, centers, coeffs, label="synth-target")


def synth_iid(spec: str, N: int, seed: int, Y: float = 1.0,
              kernel: Optional[Kernel] = None) -> List[Tuple[np.ndarray, float]]:
    """Deterministic iid example generator.

    ``uniform-smooth``: x uniform on [0,1]^m, y = clip(target(x) + noise);
    ``sign-noise``: x uniform, y = +/-Y coin flips.
    """
    if kernel is None:
        kernel = parse_kernel("fermi-sobolev")
    rng = derived_rng(seed, _STREAM_SYNTH)
    m = kernel.dimension
    pairs: List[Tuple[np.ndarray, float]] = []
    if spec == "uniform-smooth":
        target = synth_target(kernel, Y)
        for _ in range(N):
            x = rng.uniform(0.0, 1.0, size=m)
            y = float(np.clip(target(x) + 0.2 * Y * rng.standard_normal(), -Y, Y))
            pairs.append((x, y))
    elif spec == "sign-noise":
        for _ in range(N):
            x = rng.uniform(0.0, 1.0, size=m)
            pairs.append((x, float(Y if rng.random() < 0.5 else -Y)))
    else:
        raise ValueError(f"unknown synthetic spec {spec!r}")
    return pairs


# ---------------------------------------------------------------------------
# averaged-rule risk experiment
# ---------------------------------------------------------------------------

def cor2_experiment(algorithm: str, kernel_str: str, Y: float, spec: str, N: int,
                    trials: int, delta: float, master_seed: int = 0,
                    mc_samples: int = 10_000) -> dict:
    """Monte-Carlo check of the averaged-rule risk bound.

    Per trial: train the averaged rule on N fresh examples, estimate the risk
    of the rule and of the synthetic-target comparator on mc_samples fresh
    examples, and record whether the high-probability inequality held.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    kernel = parse_kernel(kernel_str)
    variant = {"aln": defensive.ALN, "k29": defensive.K29}.get(algorithm.strip())
    if variant is None:
        raise ValueError("cor2_experiment needs a defensive algorithm (aln or k29)")
    D = synth_target(kernel, Y)
    bound = bounds.risk_bound_cor2(Y, kernel.bound, D.norm, N, delta)
    failures = 0
    gaps = []
    for t in range(trials):
        seed_train = int(derived_rng(master_seed, _STREAM_COR2, t, 0).integers(2 ** 31))
        seed_test = int(derived_rng(master_seed, _STREAM_COR2, t, 1).integers(2 ** 31))
        train = synth_iid(spec, N, seed_train, Y, kernel)
        rule = comparators.averaged_rule(variant, kernel, Y, train)
        test = synth_iid(spec, mc_samples, seed_test, Y, kernel)
        X = np.stack([x for x, _ in test])
        ys = np.array([y for _, y in test])
        risk_h = float(((ys - rule.eval_many(X)) ** 2).mean())
        risk_d = float(((ys - D.eval_many(X)) ** 2).mean())
        gap = risk_h - risk_d
        gaps.append(gap)
        if gap > bound:
            failures += 1
    return {
        "trials": trials,
        "failures": failures,
        "failure_fraction": failures / trials,
        "bound": bound,
        "delta": delta,
        "max_gap": max(gaps),
        "mean_gap": sum(gaps) / len(gaps),
    }
