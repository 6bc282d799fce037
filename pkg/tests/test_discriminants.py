import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from opuc.discriminants import (Derivative, Method, QDifference, cj_delta, delta, delta_brute, delta_closed,
                                discriminant, generalized_discriminant, q_discriminant, q_discriminant_alt,
                                resultant_discriminant, rs_disc, rs_disc2, rs_disc3, rs_disc_q_limit,
                                sylvester_discriminant, sz_delta, write_disc_table)
from opuc.errors import DomainError, NoLadderForOperator
from opuc.families import cj_system, rs_H_coeffs, rs_system, sz_system
from opuc.poly import ComplexPoly
from opuc.system import build_from_reflections

coef = st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False, allow_infinity=False)


def _close(res, ref, tol):
    return abs(res.value - ref) <= tol * max(abs(ref), 1e-300)


@given(coef, coef, coef)
def test_quadratic(a, b, c):
    p = ComplexPoly([c, b, a])
    ref = b * b - 4 * a * c
    if abs(ref) < 1e-3 * (abs(b) ** 2 + abs(a * c)):
        return  # near-double root; root products lose relative accuracy
    for fn in (discriminant, resultant_discriminant, sylvester_discriminant):
        assert _close(fn(p), ref, 1e-9)


@given(coef, coef, coef, coef)
def test_cubic(a, b, c, d):
    p = ComplexPoly([d, c, b, a])
    ref = 18 * a * b * c * d - 4 * b**3 * d + b * b * c * c - 4 * a * c**3 - 27 * a * a * d * d
    scale = max(abs(x) for x in (18 * a * b * c * d, 4 * b**3 * d, b * b * c * c, 4 * a * c**3, 27 * a * a * d * d))
    if abs(ref) < 1e-3 * scale:
        return
    for fn in (discriminant, resultant_discriminant, sylvester_discriminant):
        assert abs(fn(p).value - ref) < 1e-8 * scale


@given(coef, coef, coef, st.floats(0.05, 0.95))
def test_q_discriminant_quadratic(a, b, c, q):
    p = ComplexPoly([c, b, a])
    ref = q * b * b - (1 + q) ** 2 * a * c
    scale = abs(q * b * b) + abs((1 + q) ** 2 * a * c)
    assert abs(q_discriminant(p, q).value - ref) < 1e-10 * scale
    assert abs(q_discriminant_alt(p, q).value - ref) < 1e-10 * scale


def test_q_discriminant_tends_to_classical():
    rng = np.random.default_rng(6)
    p = ComplexPoly(rng.normal(size=5) + 1j * rng.normal(size=5))
    d = discriminant(p)
    gaps = [q_discriminant(p, q).rel_diff(d) for q in (1 - 1e-3, 1 - 1e-5)]
    assert gaps[1] < 1e-4 and gaps[0] / gaps[1] > 50  # gap shrinks like (1 - q)


@given(st.lists(st.tuples(st.floats(0.05, 0.9), st.floats(0, 6.28)), min_size=2, max_size=10))
def test_delta_root_product_vs_closed(pairs):
    sys = build_from_reflections([m * np.exp(1j * t) for m, t in pairs])
    for n in range(1, sys.N + 1):
        b, c = delta(sys, n)
        assert b.method is Method.ROOT_PRODUCT and c.method is Method.SCHUR_LEMMA
        assert b.rel_diff(c) < 1e-8


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
def test_circular_jacobi_delta_formula(a):
    sys = cj_system(a, 10)
    for n in range(1, 11):
        assert cj_delta(a, n).rel_diff(delta_closed(sys, n)) < 1e-10
        assert delta_brute(sys, n).rel_diff(delta_closed(sys, n)) < 1e-8


@pytest.mark.parametrize("a,b", [(1.0, 0.5), (2.0, 0.3), (0.5, 1.5)])
def test_szego_delta_formula(a, b):
    sys = sz_system(a, b, 10)
    for m in range(1, 11):
        assert sz_delta(a, b, m).rel_diff(delta_closed(sys, m)) < 1e-10


def test_derivative_discriminant_is_the_classical_one():
    sys = cj_system(1.5, 8)
    for n in range(2, 9):
        brute, closed = generalized_discriminant(sys, n, Derivative())
        assert brute.rel_diff(closed) < 1e-8
        assert brute.rel_diff(discriminant(sys.phi[n])) < 1e-9


@pytest.mark.parametrize("q", [0.2, 0.5, 0.8])
def test_rogers_szego_closed_forms(q):
    sys = rs_system(q, 8)
    for n in range(2, 9):
        brute, closed = generalized_discriminant(sys, n, QDifference(q))
        assert brute.rel_diff(closed) < 1e-8
        assert rs_disc(q, n).rel_diff(brute) < 1e-8
        H = ComplexPoly(rs_H_coeffs(q, n))
        assert rs_disc2(q, n).rel_diff(q_discriminant(H, q)) < 1e-8
        assert rs_disc3(q, n).rel_diff(rs_disc2(q, n)) < 1e-11


def test_printed_rearrangement_differs():
    assert rs_disc3(0.5, 3, printed=True).rel_diff(rs_disc2(0.5, 3)) > 0.5


def test_h2_discriminant_value():
    q = 0.3
    assert rs_disc2(q, 2).value == pytest.approx(-(1 + q) ** 2 * (1 - q) / q, rel=1e-13)


def test_q_limit_decay():
    grid = [1 - 10.0 ** -k for k in range(1, 8)]
    res = rs_disc_q_limit(4, grid)
    assert [r.n for r in res] == [2, 3, 4]
    assert all(r.passed and r.decreasing_tail for r in res)
    # the 1e-6 level is out of reach at q = 1 - 1e-3: |D(H_2)| is about 4e-3 there
    short = rs_disc_q_limit(2, grid[:3])
    assert not short[0].passed and short[0].final_abs == pytest.approx(4e-3, rel=0.01)


def test_errors(tmp_path):
    with pytest.raises(DomainError):
        discriminant(ComplexPoly([1.0, 2.0]))
    with pytest.raises(DomainError):
        sylvester_discriminant(ComplexPoly(np.ones(8)))
    with pytest.raises(NoLadderForOperator):
        generalized_discriminant(rs_system(0.5, 4), 3, QDifference(0.3))
    with pytest.raises(DomainError):
        rs_disc_q_limit(3, [0.5, 0.4])
    sys = cj_system(1.0, 4)
    write_disc_table(tmp_path / "d.csv", [delta(sys, n) for n in range(1, 5)])
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert len(lines) == 5 and lines[0].startswith("family,params,n,method")


def test_log_domain_avoids_overflow():
    sys = rs_system(0.05, 40)
    b, c = generalized_discriminant(sys, 30, QDifference(0.05))
    assert math.isfinite(b.log_abs) and b.rel_diff(c) < 1e-6
