import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from okreg import kernels
from okreg.kernels import (ForecastKernel, KernelError, constant, custom,
                           fermi_sobolev, gram, is_numerically_psd,
                           merge_forecast, parse_kernel, sobolev01, sobolev_r,
                           tensor_power, triangular, zero)


def test_bound_constants():
    assert abs(sobolev01().bound - math.sqrt(1.0 / math.tanh(1.0))) < 1e-12
    assert abs(fermi_sobolev().bound - 2.0 / math.sqrt(3.0)) < 1e-12
    assert abs(sobolev_r().bound - 1.0 / math.sqrt(2.0)) < 1e-12
    assert triangular(2.5).bound == 2.5
    assert constant(4.0).bound == 2.0
    assert zero().bound == 0.0


def test_tensor_bounds_exact_powers():
    for m in (1, 2, 3, 5):
        for base in (sobolev01(), fermi_sobolev(), sobolev_r()):
            assert tensor_power(base, m).bound == base.bound ** m


def test_sobolev01_closed_form():
    k = sobolev01()
    # cosh(min(s,t)) cosh(min(1-s,1-t)) / sinh(1), checked point by point
    for s, t in [(0.0, 0.0), (0.0, 1.0), (0.3, 0.7), (0.5, 0.5), (0.9, 0.2)]:
        want = math.cosh(min(s, t)) * math.cosh(min(1 - s, 1 - t)) / math.sinh(1.0)
        assert abs(k([s], [t]) - want) < 1e-14
    assert abs(k([0.0], [1.0]) - 1.0 / math.sinh(1.0)) < 1e-15


def test_fermi_sobolev_closed_form():
    k = fermi_sobolev()
    for s, t in [(0.0, 0.0), (0.0, 1.0), (0.25, 0.75), (0.5, 0.5), (1.0, 1.0)]:
        want = 0.5 * min(s, t) ** 2 + 0.5 * min(1 - s, 1 - t) ** 2 + 5.0 / 6.0
        assert abs(k([s], [t]) - want) < 1e-14
    assert abs(k([0.0], [0.0]) - 4.0 / 3.0) < 1e-15
    assert abs(k([0.0], [1.0]) - 5.0 / 6.0) < 1e-15


def test_sobolev_r_and_triangular_closed_forms():
    kr = sobolev_r()
    for s, t in [(0.0, 0.0), (-3.0, 4.5), (1.2, 1.2)]:
        assert abs(kr([s], [t]) - 0.5 * math.exp(-abs(s - t))) < 1e-14
    kt = triangular(2.0)
    assert kt([0.0], [0.25]) == pytest.approx(4.0 * 0.75)
    assert kt([0.0], [1.5]) == 0.0
    assert kt([5.0], [5.0]) == 4.0


def test_constant_and_zero():
    assert constant(3.0)([0.1], [9.0]) == 3.0
    assert zero()([1.0], [2.0]) == 0.0


def test_unit_domain_rejected_outside():
    with pytest.raises(KernelError):
        sobolev01()([1.5], [0.5])
    with pytest.raises(KernelError):
        fermi_sobolev()([-0.1], [0.5])
    sobolev_r()([-10.0], [10.0])  # real-line kernel accepts anything


def test_dimension_mismatch():
    with pytest.raises(KernelError):
        sobolev01()([0.1, 0.2], [0.3])


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
@settings(max_examples=60, deadline=None)
def test_symmetry_and_cauchy_schwarz(s, t):
    for k in (sobolev01(), fermi_sobolev(), sobolev_r(), triangular(1.3)):
        a = k([s], [t])
        assert a == k([t], [s])
        assert abs(a) <= math.sqrt(k([s], [s]) * k([t], [t])) + 1e-12
        assert k([s], [s]) <= k.bound ** 2 + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 25))
def test_gram_symmetric_psd(seed, n):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=(n, 1))
    for k in (sobolev01(), fermi_sobolev(), sobolev_r(), triangular(0.7)):
        G = gram(k, pts).entries
        assert np.array_equal(G, G.T)
        assert is_numerically_psd(G)


def test_tensor_gram_is_product_of_coordinates(rng):
    base = fermi_sobolev()
    k3 = tensor_power(base, 3)
    pts = rng.uniform(0.0, 1.0, size=(6, 3))
    G = gram(k3, pts).entries
    expect = np.ones((6, 6))
    for d in range(3):
        expect *= gram(base, pts[:, d:d + 1]).entries
    assert np.allclose(G, expect, atol=1e-14)


def test_cross_matches_pairwise(rng, builtin_kernel):
    k = builtin_kernel
    lo, hi = (0.0, 1.0) if k.unit_domain else (-2.0, 2.0)
    X = rng.uniform(lo, hi, size=(8, 1))
    x = rng.uniform(lo, hi, size=1)
    v = k.cross(x, X)
    assert np.allclose(v, [k(x, row) for row in X], atol=1e-14)


def test_custom_requires_bound():
    ev = lambda x, y: float(np.dot(x, y))
    with pytest.raises(KernelError):
        custom("dot", ev, 2)
    k = custom("dot", ev, 2, bound=2.0)
    assert k([1.0, 1.0], [1.0, 0.0]) == 1.0
    G = gram(k, np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])).entries
    assert np.array_equal(G, G.T)


def test_merge_forecast_defaults_and_validation():
    base = fermi_sobolev()
    fk = merge_forecast(base, Y=2.0)
    assert fk.a0 == 0.25 and fk.a1 == 1.0
    assert fk(1.0, [0.2], -1.0, [0.2]) == pytest.approx(-0.25 + base([0.2], [0.2]))
    with pytest.raises(KernelError):
        merge_forecast(base, Y=2.0, a0=0.0)
    with pytest.raises(KernelError):
        merge_forecast(base, Y=2.0, a1=-1.0)
    with pytest.raises(KernelError):
        merge_forecast(base, Y=0.0)


def test_forecast_kernel_gram(rng):
    base = sobolev01()
    fk = ForecastKernel(0.5, 2.0, base, 1.0)
    pts = rng.uniform(0.0, 1.0, size=(5, 1))
    mus = rng.uniform(-1.0, 1.0, size=5)
    G = fk.gram(mus, pts)
    want = 0.5 * np.outer(mus, mus) + 2.0 * gram(base, pts).entries
    assert np.allclose(G, want, atol=1e-14)


def test_parse_kernel_grammar():
    assert parse_kernel("sobolev01").name == "sobolev01"
    assert parse_kernel("triangular:2").param == 2.0
    assert parse_kernel("constant:0.5").param == 0.5
    k = parse_kernel("tensor:fermi-sobolev:4")
    assert k.dimension == 4
    assert k.bound == pytest.approx((2.0 / math.sqrt(3.0)) ** 4)
    with pytest.raises(KernelError):
        parse_kernel("gaussian")
    with pytest.raises(KernelError):
        kernels.triangular(-1.0)
