import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sp

from opuc.errors import DomainError, PoleInParameter
from opuc.special import (bessel_i, hyp2f1_terminating, jacobi_laurent, jacobi_p, kahan_sum,
                          pochhammer, q_pochhammer)


def test_kahan_sum_matches_fsum():
    vals = [0.1] * 100000 + [1e-3j] * 1000
    s = kahan_sum(vals)
    assert abs(s.real - math.fsum([0.1] * 100000)) < 1e-12
    assert abs(s.imag - 1.0) < 1e-13


@given(st.floats(-5, 5), st.integers(0, 12))
def test_pochhammer_vs_scipy(a, n):
    assert pochhammer(a, n) == pytest.approx(sp.poch(a, n), rel=1e-12, abs=1e-12)


@given(st.floats(-0.9, 0.9), st.floats(0.05, 0.95), st.integers(0, 15))
def test_q_pochhammer_finite_is_the_product(a, q, n):
    ref = math.prod(1 - a * q**k for k in range(n))
    assert q_pochhammer(a, q, n) == pytest.approx(ref, rel=1e-13)


def test_q_pochhammer_infinite_euler():
    # (q;q)_inf against Euler's pentagonal series
    q = 0.3
    pent = sum((-1) ** k * q ** (k * (3 * k - 1) // 2) for k in range(-30, 31))
    assert q_pochhammer(q, q) == pytest.approx(pent, rel=1e-14)


@pytest.mark.parametrize("nu", [0, 1, 2, 5, 11])
@pytest.mark.parametrize("t", [0.01, 0.5, 1.0, 2.0, 10.0, 30.0])
def test_bessel_i_vs_scipy(nu, t):
    assert bessel_i(nu, t) == pytest.approx(sp.iv(nu, t), rel=1e-13)


def test_bessel_i_range_guard():
    with pytest.raises(DomainError):
        bessel_i(0, 80.0)


@given(st.integers(0, 10), st.floats(-3, 3), st.floats(0.5, 4), st.floats(-0.9, 0.9))
def test_terminating_hyp2f1_vs_scipy(n, b, c, x):
    ref = sp.hyp2f1(-n, b, c, x)
    assert hyp2f1_terminating(n, b, c, x).real == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_hyp2f1_pole():
    with pytest.raises(PoleInParameter):
        hyp2f1_terminating(4, 1.0, -2.0, 0.3)


@given(st.integers(0, 12), st.floats(-0.9, 3), st.floats(-0.9, 3))
def test_jacobi_vs_scipy(n, al, be):
    x = np.linspace(-1, 1, 7)
    assert np.allclose(jacobi_p(n, al, be, x), sp.eval_jacobi(n, al, be, x), rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_jacobi_laurent_evaluates_to_jacobi(n):
    al, be = 0.5, -0.5
    c = jacobi_laurent(n, al, be)
    z = np.exp(1j * np.array([0.3, 1.2, 2.9]))
    val = sum(c[k] * z ** (k - n) for k in range(c.size))
    assert np.allclose(val, sp.eval_jacobi(n, al, be, z.real), atol=1e-12)
