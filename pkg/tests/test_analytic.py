import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from adbsim import analytic
from adbsim.analytic import (
    ActiveCase,
    AdbAnalyticConfig,
    adb_closed_form,
    c11_closed,
    c12_closed,
    c21_closed,
    c22_closed,
)
from adbsim.errors import ConfigError, DomainError
from adbsim.special import SAAParams, saa_pdf, scaled_exp_e1

powers = st.floats(0.01, 100.0)


def mc_min_rate(p_s, n, sigma2, samples, seed):
    rng = np.random.default_rng(seed)
    z = rng.exponential(2 * sigma2, size=(samples, n)).min(axis=1)
    x = np.log2(1 + p_s * z)
    return x.mean(), x.std(ddof=1) / math.sqrt(samples)


def saa_quadrature(p_r, n, sigma_h2):
    """Integral of log2(1 + p_r n t^2) against the SAA density of t = sum/sqrt(n)."""
    p = SAAParams(n, sigma_h2)
    f = lambda t: math.log2(1 + p_r * n * t * t) * saa_pdf(t, p)
    return quad(f, 0, np.inf, epsabs=1e-13, epsrel=1e-13, limit=500)[0]


def test_c11_zero_power_limit():
    assert c11_closed(0.0, 2, 1.0) == 0.0
    assert c11_closed(1e-12, 2, 1.0) < 1e-11


def test_c11_monte_carlo_m2():
    mc, se = mc_min_rate(4.0, 2, 1.0, 10**7, seed=101)
    assert abs(c11_closed(4.0, 2, 1.0) - mc) <= 3 * se


def test_c21_monte_carlo_group_of_three():
    mc, se = mc_min_rate(4.0, 3, 1.0, 10**7, seed=202)
    assert abs(c21_closed(4.0, 4, 1, 1.0) - mc) <= 3 * se


def test_c11_decreasing_in_group_size():
    assert c11_closed(3.0, 1, 1.0) > c11_closed(3.0, 2, 1.0)


def test_c21_symmetry_and_limit():
    assert c21_closed(2.5, 4, 2, 1.0) == c11_closed(2.5, 2, 1.0)
    assert c21_closed(0.0, 4, 2, 1.0) == 0.0


@given(powers, powers, st.integers(1, 6))
def test_c11_increasing_in_power(a, b, m):
    lo, hi = sorted((a, b))
    if hi > lo * (1 + 1e-9):
        assert c11_closed(lo, m, 1.0) < c11_closed(hi, m, 1.0)


def test_negative_power_rejected():
    with pytest.raises(DomainError):
        c11_closed(-1.0, 2, 1.0)
    with pytest.raises(DomainError):
        c22_closed(-1.0, 2, 1.0)


def test_c22_m1_collapse():
    expected = scaled_exp_e1(0.25) / math.log(2)
    assert c22_closed(2.0, 1, 1.0) == pytest.approx(expected, rel=1e-15)
    assert c12_closed(2.0, 3, 2, 1.0) == pytest.approx(expected, rel=1e-15)


def test_c22_zero_power_limit():
    assert c22_closed(0.0, 3, 1.0) == 0.0


def test_c22_quadrature_m2():
    assert abs(c22_closed(2.0, 2, 1.0) - saa_quadrature(2.0, 2, 1.0)) <= 1e-8


def test_c12_quadrature_l6_m3():
    assert abs(c12_closed(1.0, 6, 3, 1.0) - saa_quadrature(1.0, 3, 1.0)) <= 1e-8


def test_c12_symmetry():
    assert c12_closed(1.7, 4, 2, 1.0) == c22_closed(1.7, 2, 1.0)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("p_r", [0.1, 1.0, 10.0, 100.0])
def test_c22_quadrature_grid(n, p_r):
    assert abs(c22_closed(p_r, n, 1.0) - saa_quadrature(p_r, n, 1.0)) <= 1e-8


@pytest.mark.parametrize("n, p_r", [(15, 1e-3), (12, 1e-2), (8, 1e-4)])
def test_c22_ill_conditioned_sums(n, p_r):
    # High-precision quadrature of the same SAA expectation.
    with mpmath.workdps(40):
        p = SAAParams(n, 1.0)
        b = mpmath.mpf(p.b)
        norm = 2 ** (n - 1) * b**n * mpmath.factorial(n - 1)
        f = lambda t: mpmath.log(1 + p_r * n * t * t) * t ** (2 * n - 1) * mpmath.exp(-t * t / (2 * b)) / norm
        ref = float(mpmath.quad(f, [0, 1, 5, 20, mpmath.inf]) / mpmath.log(2))
    assert c22_closed(p_r, n, 1.0) == pytest.approx(ref, rel=1e-9)


def test_c22_monte_carlo_within_saa_budget():
    rng = np.random.default_rng(303)
    h = np.sqrt(rng.exponential(2.0, size=(10**7, 2))).sum(axis=1)
    mc = np.log2(1 + 2.0 * h * h).mean()
    assert abs(c22_closed(2.0, 2, 1.0) / mc - 1) <= 0.05


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("p_r", [0.1, 1.0, 100.0])
def test_saa_fitness_against_monte_carlo(n, p_r):
    rng = np.random.default_rng(1000 + n)
    h = np.sqrt(rng.exponential(2.0, size=(10**6, n))).sum(axis=1)
    mc = np.log2(1 + p_r * h * h).mean()
    assert abs(c22_closed(p_r, n, 1.0) / mc - 1) <= 0.05


def test_closed_form_zero_source_power():
    assert adb_closed_form(AdbAnalyticConfig(4, 2, 0.0, 3.0)).c_adb == 0.0


def test_symmetric_groups_equal_flows():
    r = adb_closed_form(AdbAnalyticConfig(4, 2, 3.0, 3.0))
    assert r.c_adb == min(r.c11, r.c22)


def test_closed_form_combination():
    r = adb_closed_form(AdbAnalyticConfig(5, 2, 2.0, 1.5, 1.0, 0.7))
    assert r.c_adb == 0.5 * min(r.c11, r.c22) + 0.5 * min(r.c21, r.c12)


@given(st.integers(2, 10).flatmap(lambda L: st.tuples(st.just(L), st.integers(1, L - 1))), powers, powers)
@settings(max_examples=150, deadline=None)
def test_group_swap_symmetry(Lm, p_s, p_r):
    L, m = Lm
    a = adb_closed_form(AdbAnalyticConfig(L, m, p_s, p_r)).c_adb
    b = adb_closed_form(AdbAnalyticConfig(L, L - m, p_s, p_r)).c_adb
    assert a == pytest.approx(b, rel=1e-12)


@given(st.integers(2, 10).flatmap(lambda L: st.tuples(st.just(L), st.integers(1, L - 1))),
       powers, powers, powers)
@settings(max_examples=150, deadline=None)
def test_monotone_in_each_power(Lm, p, a, b):
    L, m = Lm
    lo, hi = sorted((a, b))
    f = lambda ps, pr: adb_closed_form(AdbAnalyticConfig(L, m, ps, pr)).c_adb
    assert f(lo, p) <= f(hi, p) + 1e-12
    assert f(p, lo) <= f(p, hi) + 1e-12


@given(st.integers(2, 10).flatmap(lambda L: st.tuples(st.just(L), st.integers(1, L - 1))), powers, powers)
@settings(max_examples=100, deadline=None)
def test_active_case_consistent(Lm, p_s, p_r):
    L, m = Lm
    r = adb_closed_form(AdbAnalyticConfig(L, m, p_s, p_r))
    assert r.active_case is ActiveCase.from_rates(r.c11, r.c12, r.c21, r.c22)
    picked = {
        ActiveCase.C11_C21: r.c11 + r.c21,
        ActiveCase.C11_C12: r.c11 + r.c12,
        ActiveCase.C22_C21: r.c22 + r.c21,
        ActiveCase.C22_C12: r.c22 + r.c12,
    }[r.active_case]
    assert 0.5 * picked == pytest.approx(r.c_adb, rel=1e-14)


def test_no_clamping_over_sweep_range():
    before = analytic.clamp_count
    for n in range(1, 16):
        for p_r in np.logspace(-3, 3, 25):
            assert c22_closed(p_r, n, 1.0) >= 0
    assert analytic.clamp_count == before


def test_config_validation():
    with pytest.raises(ConfigError):
        AdbAnalyticConfig(1, 1, 1.0, 1.0)
    with pytest.raises(ConfigError):
        AdbAnalyticConfig(4, 4, 1.0, 1.0)
    with pytest.raises(DomainError):
        AdbAnalyticConfig(4, 2, -1.0, 1.0)
