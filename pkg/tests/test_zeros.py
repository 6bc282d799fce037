import numpy as np
import pytest
from hypothesis import given, strategies as st

from opuc.errors import CoincidentCharges, DomainError, ZeroLeadingCoefficient
from opuc.families import closed_ladder, closed_system, cj_system
from opuc.fields import field_for
from opuc.moments import WeightSpec
from opuc.poly import ComplexPoly
from opuc.system import build_from_reflections
from opuc.zeros import (assert_in_disk, cj_constant_q, cj_log_t, cj_stationarity_residual, log_t_function,
                        reconstruction_error, roots, roots_to_csv, stationarity_residual,
                        sz_stationarity_residual)

cplx = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


def _match(a, b):
    # greedy nearest matching of two root sets
    b = list(b)
    worst = 0.0
    for z in a:
        k = int(np.argmin([abs(z - w) for w in b]))
        worst = max(worst, abs(z - b.pop(k)))
    return worst


@given(st.lists(cplx, min_size=2, max_size=10))
def test_roots_against_numpy(rts):
    rts = np.array(rts)
    if rts.size > 1:
        d = np.abs(rts[:, None] - rts[None, :]) + np.eye(rts.size)
        if d.min() < 1e-2:
            return  # clustered roots are ill-conditioned for both solvers
    p = ComplexPoly(np.poly(rts)[::-1])
    rs = roots(p)
    assert _match(rs.roots, rts) < 1e-7 * max(1, np.max(np.abs(rts)))
    assert reconstruction_error(p, rs) < 1e-10


@given(st.lists(st.tuples(st.floats(0, 0.95), st.floats(0, 2 * np.pi)), min_size=1, max_size=15))
def test_zeros_of_orthogonal_polynomials_lie_in_the_disk(pairs):
    r = [m * np.exp(1j * a) for m, a in pairs]
    sys = build_from_reflections(r)
    rs = roots(sys.phi[sys.N])
    assert np.all(np.abs(rs.roots) < 1)
    assert reconstruction_error(sys.phi[sys.N], rs) < 1e-9


def test_zero_roots_split_off():
    p = ComplexPoly([0, 0, 0, -0.5, 1])  # z^3 (z - 0.5)
    rs = roots(p)
    assert np.sum(rs.roots == 0) == 3
    assert np.isclose(rs.roots[rs.roots != 0][0], 0.5)
    assert assert_in_disk(rs)


def test_root_errors():
    with pytest.raises(DomainError):
        roots(ComplexPoly([2.0]))
    with pytest.raises((ZeroLeadingCoefficient, DomainError)):
        roots(ComplexPoly(np.array([1.0, 2.0, 0.0])))


def test_roots_are_deterministic(tmp_path):
    p = cj_system(1.0, 9).phi[9]
    a, b = roots(p), roots(p)
    assert np.array_equal(a.roots, b.roots)
    roots_to_csv(a, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "re,im,abs,residual" and len(lines) == 10


@pytest.mark.parametrize("w", [WeightSpec.circular_jacobi(1.0), WeightSpec.szego(1.0, 0.5),
                               WeightSpec.modified_bessel(1.0)], ids=lambda w: w.label())
def test_zeros_are_stationary_points_of_the_energy(w):
    # finite differences of log T in each charge vanish at the zeros
    sys = closed_system(w, 8)
    fld = field_for(w)
    for n in (3, 6):
        A = closed_ladder(sys, n).A
        zs = roots(sys.phi[n]).roots
        assert stationarity_residual(zs, fld, A, n).residual < 1e-7
        h = 1e-6
        for j in range(n):
            e = np.zeros(n, complex)
            e[j] = h
            g = (log_t_function(zs + e, fld, A, n) - log_t_function(zs - e, fld, A, n)) / (2 * h)
            assert abs(g) < 1e-6 * n


def test_family_stationarity_and_constant_q():
    a = 1.0
    sys = cj_system(a, 12)
    z = 0.3 * np.exp(2j * np.pi * (np.arange(8) + 0.1) / 8)
    for n in range(1, 13):
        zs = roots(sys.phi[n]).roots
        assert cj_stationarity_residual(zs, a).residual < 1e-7
        vals, spread = cj_constant_q(sys.phi[n], a, n, z)
        assert spread < 1e-7
        assert np.allclose(vals, n * (a + 1), rtol=1e-9)
    a, b = 1.0, 0.5
    sz = closed_system(WeightSpec.szego(a, b), 12)
    for n in range(1, 13):
        assert sz_stationarity_residual(roots(sz.phi[n]).roots, a, b).residual < 1e-7


def test_t_function_forms_differ_by_a_constant():
    a = 1.0
    sys = cj_system(a, 8)
    fld = field_for(sys.weight)
    n = 5
    A = closed_ladder(sys, n).A
    zs = roots(sys.phi[n]).roots
    rng = np.random.default_rng(0)
    diffs = []
    for _ in range(4):
        pts = zs + 0.01 * (rng.normal(size=n) + 1j * rng.normal(size=n))
        diffs.append(np.exp(log_t_function(pts, fld, A, n) - cj_log_t(pts, a)))
    assert np.max(np.abs(np.array(diffs) / diffs[0] - 1)) < 1e-10
    perm = rng.permutation(n)
    assert np.exp(log_t_function(zs[perm], fld, A, n) - log_t_function(zs, fld, A, n)) == pytest.approx(1.0)


def test_coincident_charges():
    fld = field_for(WeightSpec.circular_jacobi(1.0))
    with pytest.raises(CoincidentCharges):
        log_t_function(np.array([0.2, 0.2 + 1e-14]), fld, lambda z: np.ones_like(z), 2)
    with pytest.raises(DomainError):
        cj_log_t(np.array([0.0, 0.3]), 1.0)
