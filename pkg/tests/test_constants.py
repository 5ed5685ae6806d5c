from __future__ import annotations

import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from krbootstrap import constants as C


def test_lambda():
    assert C.lam(4) == 2 and C.lam(5) == Fraction(8, 3) and C.lam(3) == 1


def test_fuss_catalan_examples():
    assert all(C.fuss_catalan(d, 0) == 1 for d in range(1, 10))
    assert C.fuss_catalan(1, 3) == 5
    assert C.fuss_catalan(8, 2) == 9


@given(st.integers(1, 15))
@settings(max_examples=15, deadline=None)
def test_closed_form_matches_recurrence(d):
    rec = C.fuss_catalan_recurrence(d, 20)
    assert rec == [C.fuss_catalan(d, k) for k in range(21)]


def test_gamma():
    g = C.gamma(5)
    assert abs(g - 1.5670) < 1e-3
    assert abs(6 * Fraction(g) ** 3 - Fraction(9**9, 8**8)) / Fraction(9**9, 8**8) < Fraction(1, 10**12)
    g6 = C.gamma(6)
    assert abs(g6 - (float(C.alpha(13)) / 24) ** 0.25) < 1e-12
    for r in range(5, 12):
        assert C.gamma_residual(r) <= 1e-12
    with pytest.warns(UserWarning):
        C.gamma(4)


def test_p_c():
    assert abs(C.p_c(5, 2000) - (C.gamma(5) * 2000) ** (-3 / 8)) < 1e-15
    assert abs(C.p_c(5, 2000) - 0.0488) < 1e-3
    assert abs(C.p_c(5, 8000) / C.p_c(5, 2000) - 4 ** (-3 / 8)) < 1e-12
    for n in (2, 10, 10**6):
        assert 0 < C.p_c(6, n) < 1


def test_rho():
    r = 5
    a = float(C.alpha(C.fc_degree(r)))
    x = C.rho_from_gamma_bar(r, 2 ** (1 / 3) * C.gamma(r))
    abar = C.alpha_bar(r, 2 ** (1 / 3) * C.gamma(r))
    assert abs(abar - 2 * a) < 1e-9
    assert C.rho_residual(r, abar, x) <= 1e-12 * abar
    grid = [a * 1.1 ** i for i in range(1, 21)]
    values = [C.rho(r, v) for v in grid]
    assert all(u > v > 1 for u, v in zip(values, values[1:]))
    assert C.rho(r, 1e12) - 1 < 1e-9
    with pytest.raises(ValueError):
        C.rho(r, a)


@given(st.floats(1.001, 50.0))
@settings(max_examples=40, deadline=None)
def test_rho_is_smallest_root(scale):
    r = 5
    abar = float(C.alpha(8)) * scale
    x = C.rho(r, abar)
    n = math.comb(r, 2) - 1
    # no sign change of the defining polynomial on (1, x)
    assert all((1 + (x - 1) * i / 200) ** n - abar * (x - 1) * i / 200 > 0 for i in range(1, 199))


def test_fc_generating_value():
    for d in (1, 3, 8, 13):
        assert C.fc_generating_value(d, 0.0) == 1.0
        x = 1 / (2 * float(C.alpha(d)))
        assert abs(C.fc_generating_value(d, x) - C.fc_series(d, x, 40)) < 1e-9
    with pytest.raises(ValueError):
        C.fc_generating_value(8, float(1 / C.alpha(8)) * 1.0001)


def test_rho_equals_f_at_reciprocal():
    for scale in (1.5, 2.0, 5.0):
        abar = float(C.alpha(8)) * scale
        assert abs(C.rho(5, abar) - C.fc_generating_value(8, 1 / abar)) < 1e-9


def test_droplet_scale():
    assert abs(C.droplet_scale(5, 2000, 0.0488) - (2000 * 0.0488**3) ** -0.5) < 1e-12
    assert abs(C.droplet_scale(5, 2000, 0.0488) - 2.08) < 0.01
    n = 1000
    assert abs(C.droplet_scale(6, n, n ** (-1 / 4)) - 1) < 1e-12
    with pytest.raises(ValueError):
        C.droplet_scale(4, 100, 0.1)


def test_threshold_constants_bundle():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tc = C.ThresholdConstants.of(5)
    assert tc.d == 8 and tc.lam == Fraction(8, 3)
    assert tc.p_c(2000) == C.p_c(5, 2000)
