import math

import numpy as np
import pytest

from okreg import bounds

# frozen against an independent 40-digit arbitrary-precision evaluation of
# Gamma(N/2+1) * U(N/2+1, 0, dd^2/2)
KUMMER_ORACLE = {
    (1, 0.5): 0.767276575699354058,
    (5, 1.0): 2.83999981887235701,
    (10, 2.0): 6.59115862286578687,
    (100, 1.0): 12.3686115648502529,
    (100, 3.0): 30.1533415549273516,
    (300, 1.5): 28.6603104673688323,
    (1000, 0.7): 26.4612085454722702,
}


def test_regret_thm1_formula():
    assert bounds.regret_thm1(1.0, 0.0, 0.0, 0) == 0.0
    assert bounds.regret_thm1(2.0, 1.0, 3.0, 100) == pytest.approx(
        2 * 2 * math.sqrt(2) * 5 * 10)


def test_regret_thm2_formula():
    B = math.sqrt(2.0) * 4.0
    assert bounds.regret_thm2(1.0, 1.0, 3.0, 10.0) == pytest.approx(
        2 * B * math.sqrt(10 + B * B) + 2 * B * B)
    # zero comparator loss collapses to 4 B^2
    assert bounds.regret_thm2(1.0, 1.0, 3.0, 0.0) == pytest.approx(4 * B * B)


def test_kummer_f_against_frozen_oracle():
    for (N, dd), want in KUMMER_ORACLE.items():
        assert bounds.kummer_f(N, dd) == pytest.approx(want, rel=1e-9), (N, dd)


def test_kummer_f_simpson_agreement():
    for (N, dd), want in KUMMER_ORACLE.items():
        assert abs(bounds.kummer_f_simpson(N, dd, nodes=200_001) - want) < 1e-4


def test_kummer_f_laplace_close_at_moderate_n():
    assert abs(bounds.kummer_f_laplace(100, 1.0) - KUMMER_ORACLE[(100, 1.0)]) < 0.2
    assert abs(bounds.kummer_f_laplace(100, 3.0) - KUMMER_ORACLE[(100, 3.0)]) < 0.2


def test_kummer_f_monotone():
    vals_n = [bounds.kummer_f(N, 1.5) for N in (2, 5, 20, 80, 200)]
    assert all(b > a for a, b in zip(vals_n, vals_n[1:]))
    vals_d = [bounds.kummer_f(50, dd) for dd in (0.5, 1.0, 2.0, 3.0)]
    assert all(b > a for a, b in zip(vals_d, vals_d[1:]))


def test_kummer_f_validation():
    with pytest.raises(ValueError):
        bounds.kummer_f(0, 1.0)
    with pytest.raises(ValueError):
        bounds.kummer_f(10, 0.0)


def test_kummer_f_large_n_no_overflow():
    v = bounds.kummer_f(100_000, 1.0)
    assert np.isfinite(v) and v > bounds.kummer_f(10_000, 1.0)


def test_regret_thm3_exact():
    assert bounds.regret_thm3_exact(2.0, 1.0, 1.0, 100) == pytest.approx(
        8.0 * bounds.kummer_f(100, 0.5), rel=1e-12)
    with pytest.raises(ValueError):
        bounds.regret_thm3_exact(1.0, 0.0, 1.0, 100)


def test_regret_thm3_asymptotic():
    v = bounds.regret_thm3_asymptotic(1.0, 1.0, 2.0, 100)
    lead = 2.0 * 2.0 * math.sqrt(102.0)
    assert v == pytest.approx(lead + 1.5 * math.log(100) + 1.0)
    with pytest.raises(ValueError):
        bounds.regret_thm3_asymptotic(1.0, 1.0, 2.0, 100, delta=0.0)


def test_lower_bound_thm4():
    assert bounds.lower_bound_thm4(1.0, 1.0, 2.0, 100) == pytest.approx(2 * 2 * 10 - 4)
    # at the cap d = (Y/c) sqrt(N) the bound equals Y^2 N
    assert bounds.lower_bound_thm4(1.0, 1.0, 10.0, 100) == pytest.approx(100.0)
    with pytest.raises(ValueError):
        bounds.lower_bound_thm4(1.0, 1.0, 10.5, 100)


def test_risk_bound_cor2():
    want = (2.0 / math.sqrt(100)) * (math.sqrt(2) * 4 + 2 * math.sqrt(2 * math.log(20)))
    assert bounds.risk_bound_cor2(1.0, 1.0, 3.0, 100, 0.1) == pytest.approx(want)
    with pytest.raises(ValueError):
        bounds.risk_bound_cor2(1.0, 1.0, 3.0, 100, 0.0)
    with pytest.raises(ValueError):
        bounds.risk_bound_cor2(1.0, 1.0, 3.0, 0, 0.1)


def test_bound_inputs_validation():
    bounds.BoundInputs(Y=1.0, c=1.0, d=2.0, N=10)
    with pytest.raises(ValueError):
        bounds.BoundInputs(Y=0.0)
    with pytest.raises(ValueError):
        bounds.BoundInputs(Y=1.0, c=-1.0)
    with pytest.raises(ValueError):
        bounds.BoundInputs(Y=1.0, delta=0.9)


def test_figure1_grid_small():
    rows = list(bounds.figure1_grid(n_max=3, d_lo=1.0, d_hi=1.2, d_step=0.1))
    assert len(rows) == 9
    assert rows[0][:2] == (1, 1.0)
    assert rows[-1][:2] == (3, pytest.approx(1.2))


def test_non_reproducible_claims_listed():
    stmts = bounds.NOT_REPRODUCIBLE_AT_DESK_SCALE
    assert len(stmts) == 2
    assert all(isinstance(s, str) and len(s) > 20 for s in stmts)
