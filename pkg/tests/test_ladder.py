import numpy as np
import pytest
from hypothesis import given, strategies as st

from opuc.errors import DegenerateReflection, DomainError, QuadratureNotConverged
from opuc.families import closed_ladder, closed_system, cj_P, cj_Q, rs_ladder, rs_system, sz_P, sz_Q
from opuc.fields import cj_qfield, field_for, rs_qfield
from opuc.ladder import (RationalFunction, SampledFunction, adjoint_residual, functional_equation_residual,
                         ladder_numeric, lowering_residual, ode_coefficients, ode_residual, q_adjoint_residual,
                         q_fediff_residual, q_functional_equation_residual, q_ladder_numeric, q_limit_gap,
                         raising_residual)
from opuc.moments import WeightSpec
from opuc.poly import ComplexPoly

from conftest import SAMPLES, rel

CLASSICAL = [WeightSpec.circular_jacobi(0.5), WeightSpec.circular_jacobi(3.0), WeightSpec.szego(1.5, 0.5),
             WeightSpec.szego(2.0, 0.3), WeightSpec.modified_bessel(1.5)]


def _setup(w, N):
    sys = closed_system(w, N + 2)
    fld = field_for(w)
    return sys, fld, {n: ladder_numeric(sys, fld, n) for n in range(1, N + 2)}


@pytest.mark.parametrize("w", CLASSICAL, ids=lambda w: w.label())
def test_quadrature_ladder_matches_closed_form(w):
    sys, fld, pairs = _setup(w, 6)
    for n in range(1, 7):
        c = closed_ladder(sys, n)
        assert rel(pairs[n].A(SAMPLES), c.A(SAMPLES)) < 1e-8
        assert np.max(np.abs(pairs[n].B(SAMPLES) - c.B(SAMPLES))) < 1e-8 * max(1, np.max(np.abs(c.B(SAMPLES))))
        assert lowering_residual(sys, pairs[n], n, SAMPLES) < 1e-9
        if n >= 2:
            assert raising_residual(sys, pairs[n - 1], n, SAMPLES) < 1e-9


@pytest.mark.parametrize("w", CLASSICAL, ids=lambda w: w.label())
def test_functional_equation_and_ode(w):
    sys, fld, pairs = _setup(w, 6)
    for n in range(2, 7):
        assert functional_equation_residual(sys, pairs, fld, n, SAMPLES) < 1e-9
        P, Q = ode_coefficients(sys, pairs, n, SAMPLES)
        assert ode_residual(sys, n, P, Q, SAMPLES) < 1e-7
        if w.family.value == "cj":
            assert rel(P, cj_P(w.a, n, SAMPLES)) < 1e-8 and rel(Q, cj_Q(w.a, n, SAMPLES)) < 1e-8
        if w.family.value == "sz":
            assert rel(P, sz_P(w.a, w.b, n, SAMPLES)) < 1e-8 and rel(Q, sz_Q(w.a, w.b, n, SAMPLES)) < 1e-8


def test_closed_pairs_satisfy_functional_equation_exactly():
    w = WeightSpec.circular_jacobi(1.5)
    sys = closed_system(w, 10)
    pairs = {n: closed_ladder(sys, n) for n in range(1, 10)}
    for n in range(2, 9):
        assert functional_equation_residual(sys, pairs, field_for(w), n, SAMPLES) < 1e-13


def _rand_poly(rng, d):
    return ComplexPoly(rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1))


@pytest.mark.parametrize("w", CLASSICAL, ids=lambda w: w.label())
def test_adjoint_identity_and_printed_variant(w):
    sys, fld, pairs = _setup(w, 4)
    rng = np.random.default_rng(8)
    for n in (1, 3):
        for d in (2, 8):
            f, g = _rand_poly(rng, d), _rand_poly(rng, d)
            assert adjoint_residual(sys, pairs[n], fld, n, f, g) < 1e-8
    # the multiplier conj(v + B) (instead of conj(v' + B)) breaks the identity
    f, g = _rand_poly(rng, 5), _rand_poly(rng, 5)
    assert adjoint_residual(sys, pairs[2], fld, 2, f, g, printed=True) > 1e-3


@pytest.mark.parametrize("q", [0.2, 0.5, 0.8])
def test_q_ladder_and_q_functional_equation(q):
    sys = rs_system(q, 8)
    qf = rs_qfield(q)
    qp = {n: q_ladder_numeric(sys, qf, n) for n in range(1, 8)}
    for n in range(1, 7):
        assert np.max(np.abs(qp[n].A(SAMPLES) - np.sqrt(1 - q**n) / (1 - q))) < 1e-9
        assert np.max(np.abs(qp[n].B(SAMPLES))) < 1e-9
        assert q_fediff_residual(sys, qp, qf, n, SAMPLES) < 1e-9
        if n >= 2:
            assert q_functional_equation_residual(sys, qp, qf, n, SAMPLES) < 1e-9
    rng = np.random.default_rng(2)
    f, g = _rand_poly(rng, 6), _rand_poly(rng, 6)
    assert q_adjoint_residual(sys, rs_ladder(q, 3), qf, 3, f, g) < 1e-8
    assert q_adjoint_residual(sys, rs_ladder(q, 3), qf, 3, f, g, printed=True) > 1e-3


def test_q_limit_gap_is_first_order():
    a = 1.0
    sys = closed_system(WeightSpec.circular_jacobi(a), 6)
    cp = {n: closed_ladder(sys, n) for n in range(1, 6)}
    g1 = q_limit_gap(sys, cp, cj_qfield(a, 1 - 1e-3), 4, SAMPLES)
    g2 = q_limit_gap(sys, cp, cj_qfield(a, 1 - 1e-4), 4, SAMPLES)
    for x1, x2 in zip(g1, g2):
        assert 5 < x1 / x2 < 20
        assert x2 < 1e-3


@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False), min_size=1, max_size=4),
       st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False), min_size=1, max_size=3))
def test_rational_derivative_vs_difference(num, den):
    den = [3.0] + den  # keep the denominator away from zero on |z| <= 0.45
    r = RationalFunction(num, den)
    z, h = SAMPLES[:4], 1e-5
    fd = (r(z + h) - r(z - h)) / (2 * h)
    assert np.allclose(r.derivative(z), fd, rtol=1e-5, atol=1e-6)


def test_errors():
    w = WeightSpec.lebesgue()
    sys = closed_system(w, 4)
    with pytest.raises(DegenerateReflection):
        ladder_numeric(sys, field_for(w), 2)
    sym = closed_system(WeightSpec.szego(0.5, 0.5), 4)  # a = b: odd phi_n(0) vanish
    with pytest.raises(DegenerateReflection):
        ladder_numeric(sym, field_for(sym.weight), 3)
    s = SampledFunction(SAMPLES, SAMPLES)
    with pytest.raises(DomainError):
        s(SAMPLES[:2])
    mb = closed_system(WeightSpec.modified_bessel(2.0), 8)
    with pytest.raises(QuadratureNotConverged):
        ladder_numeric(mb, field_for(mb.weight), 6, M=12)
    with pytest.raises(IndexError):
        ladder_numeric(mb, field_for(mb.weight), 20)
