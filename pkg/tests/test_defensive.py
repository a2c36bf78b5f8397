import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from okreg import defensive, harness, kernels
from okreg.defensive import ALN, K29, certificate, default_tolerance, new_state
from okreg.game import GameTranscript, ProtocolError

# real root of mu^3 + mu = 1, to 16 digits
CUBIC_ROOT = 0.6823278038280193


def test_first_round_is_zero():
    for variant in (ALN, K29):
        st_ = new_state(variant, kernels.fermi_sobolev(), Y=1.0)
        assert st_.predict([0.3]) == 0.0


def test_aln_cubic_root_example():
    # constant kernel 1, a0 = a1 = 1, one round (x, mu=0, y=1):
    # S(mu) = 1 - mu - mu^3, whose root solves mu^3 + mu = 1
    st_ = new_state(ALN, kernels.constant(1.0), Y=1.0, a0=1.0, a1=1.0)
    assert st_.predict([0.0]) == 0.0
    st_.observe([0.0], 1.0)
    mu = st_.predict([0.0])
    assert abs(mu - CUBIC_ROOT) < 1e-9
    assert abs(st_.s_function([0.0], mu)) <= st_.tau


def test_k29_endpoint_example():
    # without the cubic term S stays positive on [-Y, Y], so predict +Y
    st_ = new_state(K29, kernels.fermi_sobolev(), Y=1.0)
    st_.predict([0.5])
    st_.observe([0.5], 1.0)
    assert st_.predict([0.5]) == 1.0


def test_plain_kernel_mode_ignores_predictions():
    st_ = new_state(ALN, kernels.fermi_sobolev(), Y=1.0, a0=0.0, a1=1.0)
    st_.predict([0.2])
    st_.observe([0.2], 0.8)
    A, B, kxx = st_._s_coeffs([0.4])
    # a0 = 0: S(mu) = B - a1*kxx*mu, root B/kxx
    mu = st_.predict([0.4])
    assert abs(mu - B / kxx) < 1e-9


def test_s_function_matches_coeffs(rng):
    st_ = new_state(ALN, kernels.sobolev01(), Y=1.5)
    for _ in range(6):
        x = rng.uniform(0.0, 1.0, size=1)
        st_.predict(x)
        st_.observe(x, float(rng.uniform(-1.5, 1.5)))
    x = rng.uniform(0.0, 1.0, size=1)
    A, B, kxx = st_._s_coeffs(x)
    for mu in (-1.5, -0.3, 0.0, 0.7, 1.5):
        want = st_.a0 * A * mu + B - (st_.a0 * mu * mu + st_.a1 * kxx) * mu
        assert st_.s_function(x, mu) == pytest.approx(want, abs=1e-14)


def test_protocol_errors():
    st_ = new_state(ALN, kernels.fermi_sobolev(), Y=1.0)
    with pytest.raises(ProtocolError):
        st_.observe([0.1], 0.0)
    st_.predict([0.1])
    with pytest.raises(ProtocolError):
        st_.observe([0.2], 0.0)  # different object than predicted
    with pytest.raises(ProtocolError):
        st_.observe([0.1], 1.5)  # label outside [-Y, Y]


def test_constructor_validation():
    k = kernels.fermi_sobolev()
    with pytest.raises(ValueError):
        new_state("other", k, 1.0)
    with pytest.raises(ValueError):
        new_state(ALN, k, -1.0)
    with pytest.raises(ValueError):
        new_state(ALN, k, 1.0, a0=0.0, a1=0.0)
    with pytest.raises(ValueError):
        new_state(ALN, k, 1.0, tau=0.0)


def test_default_tolerance_scales_with_bound():
    assert default_tolerance(kernels.fermi_sobolev()) == pytest.approx(1e-12 * 4.0 / 3.0)
    assert default_tolerance(kernels.sobolev_r()) == 1e-12
    assert default_tolerance(kernels.triangular(10.0)) == pytest.approx(1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([ALN, K29]),
       st.floats(0.5, 3.0))
def test_predictions_are_roots_or_signed_endpoints(seed, variant, Y):
    rng = np.random.default_rng(seed)
    st_ = new_state(variant, kernels.fermi_sobolev(), Y)
    for _ in range(8):
        x = rng.uniform(0.0, 1.0, size=1)
        mu = st_.predict(x)
        assert -Y <= mu <= Y
        s = st_.s_function(x, mu)
        if abs(mu) < Y:
            assert abs(s) <= st_.tau
        else:
            # endpoint predictions keep S pointed outward (or already small)
            assert abs(s) <= st_.tau or math.copysign(1.0, s) == math.copysign(1.0, mu)
        st_.observe(x, float(rng.uniform(-Y, Y)))


def _small_transcript(variant, Y=1.0, n=25, seed=5):
    return harness.run_mixed_game(variant, "fermi-sobolev", Y, n, seed)


def test_certificate_matches_manual_gram_form():
    t = _small_transcript("aln")
    k = kernels.fermi_sobolev()
    cert = certificate(t, k, 1.0, variant=ALN)
    mus = np.asarray(t.mus)
    r = t.residuals
    kt = np.outer(mus, mus) + kernels.gram(k, t.points).entries
    assert cert.lhs == pytest.approx(float(r @ kt @ r), rel=1e-12)
    assert cert.rhs == pytest.approx(float(((1.0 - mus ** 2) * np.diag(kt)).sum()), rel=1e-12)
    assert cert.slack_allowance == pytest.approx(4 * len(t) * default_tolerance(k) * 1.0)
    assert cert.holds


def test_certificates_hold_both_variants_adversarial():
    for variant, var_const in (("aln", ALN), ("k29", K29)):
        for seed in range(4):
            t = harness.run_mixed_game(variant, "sobolev01", 1.0, 60, seed,
                                       flip_prob=1.0)
            cert = certificate(t, kernels.sobolev01(), 1.0, variant=var_const)
            assert cert.holds, (variant, seed, cert)


def test_certificate_empty_transcript():
    t = GameTranscript("aln", "fermi-sobolev", 1.0)
    cert = certificate(t, kernels.fermi_sobolev(), 1.0)
    assert cert.lhs == cert.rhs == cert.slack_allowance == 0.0


def test_resolution_check_brute_force():
    t = _small_transcript("aln-plain", n=30)
    k = kernels.fermi_sobolev()
    D = harness.synth_target(k, 1.0)
    lhs, rhs = defensive.resolution_check(t, k, 1.0, D)
    brute = abs(sum((y - mu) * D(x) for x, mu, y in zip(t.xs, t.mus, t.ys)))
    assert lhs == pytest.approx(brute, rel=1e-10)
    assert rhs == pytest.approx(1.0 * k.bound * D.norm * math.sqrt(len(t)))
    allow = defensive.resolution_allowance(len(t), default_tolerance(k), 1.0, D.norm)
    assert lhs <= rhs + allow
