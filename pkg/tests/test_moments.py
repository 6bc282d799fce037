import math

import numpy as np
import pytest
from scipy import special as sp
from scipy.integrate import quad

from opuc.errors import DomainError, GridTooCoarse, NotPositiveDefinite
from opuc.moments import WeightSpec, inner_product, quadrature_rule, system_from_moments, toeplitz_det, trig_moments

WEIGHTS = [WeightSpec.lebesgue(), WeightSpec.circular_jacobi(0.5), WeightSpec.circular_jacobi(2.5),
           WeightSpec.szego(1.0, 0.5), WeightSpec.szego(0.5, 0.5), WeightSpec.modified_bessel(2.0),
           WeightSpec.rogers_szego(0.5)]


def _adaptive_moment(w, j):
    re = quad(lambda th: w.density(th) * math.cos(j * th), -math.pi, math.pi, limit=400, epsabs=1e-14)[0]
    im = quad(lambda th: -w.density(th) * math.sin(j * th), -math.pi, math.pi, limit=400, epsabs=1e-14)[0]
    return complex(re, im)


@pytest.mark.parametrize("w", WEIGHTS, ids=lambda w: w.label())
def test_moments_vs_adaptive_quadrature(w):
    m = trig_moments(w, 6)
    for j in range(-6, 7):
        assert abs(m.c(j) - _adaptive_moment(w, j)) < 1e-10


def test_bessel_moments_closed_form():
    t = 1.7
    m = trig_moments(WeightSpec.modified_bessel(t), 8)
    for j in range(9):
        assert abs(m.c(j) - sp.iv(j, t) / sp.iv(0, t)) < 1e-14


def test_circular_jacobi_moments_closed_form():
    a = 1.3
    m = trig_moments(WeightSpec.circular_jacobi(a), 8)
    for j in range(9):
        ref = (-1) ** j * sp.gamma(a + 1) ** 2 * sp.rgamma(a + 1 + j) * sp.rgamma(a + 1 - j)
        assert abs(m.c(j) - ref) < 1e-12


def test_rogers_szego_moments_closed_form():
    q = 0.3
    m = trig_moments(WeightSpec.rogers_szego(q), 8)
    for j in range(9):
        assert abs(m.c(j) - (-1) ** j * q ** (j * j / 2)) < 1e-14


def test_toeplitz_ratios_give_kappa():
    w = WeightSpec.szego(1.0, 0.5)
    m = trig_moments(w, 8)
    sys = system_from_moments(m)
    for n in range(8):
        l0, _ = toeplitz_det(m, n + 1)
        l1, _ = toeplitz_det(m, n + 2)
        assert sys.kappa[n + 1] ** 2 == pytest.approx(math.exp(l0 - l1), rel=1e-11)


@pytest.mark.parametrize("w", WEIGHTS[1:], ids=lambda w: w.label())
def test_moment_system_is_orthonormal(w):
    sys = system_from_moments(trig_moments(w, 8))
    for j in range(9):
        for k in range(j, 9):
            ip = inner_product(sys.phi[j], sys.phi[k], w)
            assert abs(ip - (j == k)) < 1e-11


def test_custom_moments_roundtrip():
    w = WeightSpec.modified_bessel(1.0)
    m = trig_moments(w, 6)
    cw = WeightSpec.custom([3 * m.c(j) for j in range(7)])
    a, b = system_from_moments(trig_moments(cw, 6)), system_from_moments(m)
    assert np.allclose(a.kappa, b.kappa, rtol=1e-13)


def test_errors():
    with pytest.raises(NotPositiveDefinite):
        system_from_moments(trig_moments(WeightSpec.custom([1.0, 2.0]), 1))
    with pytest.raises(GridTooCoarse):
        trig_moments(WeightSpec.lebesgue(), 10, M=8)
    with pytest.raises(DomainError):
        WeightSpec.circular_jacobi(-0.7)
    with pytest.raises(DomainError):
        WeightSpec.rogers_szego(1.2)
    with pytest.raises(DomainError):
        quadrature_rule(WeightSpec.custom([1.0]))
