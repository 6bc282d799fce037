import numpy as np
import pytest
from hypothesis import given, strategies as st

from opuc.errors import InvalidReflectionData, PoleAtUnimodularProduct
from opuc.system import (OPUCSystem, build_from_phi0, build_from_reflections, cd_closed_form, cd_residual,
                         kl_residual, subleading_from_sum, szego_residuals, three_term_residual)

refl = st.lists(st.tuples(st.floats(-0.63, 0.63), st.floats(-0.63, 0.63)).map(lambda t: complex(*t)),
                min_size=1, max_size=14)


def _random(N, seed=0, rmax=0.9):
    rng = np.random.default_rng(seed)
    r = rmax * np.sqrt(rng.random(N)) * np.exp(2j * np.pi * rng.random(N))
    return build_from_reflections(r)


def test_bernstein_szego_orthonormality():
    # with r_k = 0 beyond N, the orthogonality measure is dtheta / (2 pi |phi_N^*|^2)
    sys = _random(10, seed=2, rmax=0.5)
    M = 4096
    z = np.exp(2j * np.pi * np.arange(M) / M)
    w = 1.0 / np.abs(sys.phistar[sys.N](z)) ** 2 / M
    V = np.array([sys.phi[k](z) for k in range(sys.N + 1)])
    G = (V * w) @ V.conj().T
    assert np.max(np.abs(G - np.eye(sys.N + 1))) < 1e-12


@given(refl)
def test_recurrence_invariants(r):
    sys = build_from_reflections(r)
    s1, s2 = szego_residuals(sys)
    assert s1 < 1e-12 and s2 < 1e-12
    # kappa_n^2 = sum_k |phi_k(0)|^2 and kappa increases
    for n in range(sys.N + 1):
        assert sys.kappa[n] ** 2 == pytest.approx(np.sum(np.abs(sys.phi0[: n + 1]) ** 2), rel=1e-12)
    assert np.all(np.diff(sys.kappa) >= 0)
    assert np.allclose(sys.reflections[1:], r, atol=1e-14)


@given(refl)
def test_subleading_and_kl(r):
    sys = build_from_reflections(r)
    for n in range(1, sys.N + 1):
        assert abs(subleading_from_sum(sys, n) - sys.ell[n]) <= 1e-12 * max(1.0, sys.kappa[n])
    for n in range(sys.N):
        assert kl_residual(sys, n) < 1e-12


def test_three_term_coefficientwise_and_sampled():
    sys = _random(20, seed=3)
    z = 0.6 * np.exp(1j * np.linspace(0, 6, 9))
    for n in range(1, sys.N):
        assert three_term_residual(sys, n) < 1e-12
        assert three_term_residual(sys, n, z) < 1e-12


def test_cd_kernel_closed_form():
    sys = _random(12, seed=4)
    rng = np.random.default_rng(0)
    for _ in range(32):
        a, z = (0.95 * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2)))
        for n in range(sys.N):
            assert cd_residual(sys, n, a, z) < 1e-11


def test_cd_pole_on_the_circle():
    sys = _random(4)
    with pytest.raises(PoleAtUnimodularProduct):
        cd_closed_form(sys, 2, 1.0, 1.0)


def test_invalid_reflections():
    with pytest.raises(InvalidReflectionData):
        build_from_reflections([0.5, 1.0])
    with pytest.raises(InvalidReflectionData):
        build_from_phi0([1.0, np.inf])
    with pytest.raises(InvalidReflectionData):
        build_from_phi0([np.nan])


def test_json_roundtrip_and_readonly():
    sys = _random(6, seed=9)
    back = OPUCSystem.from_json_dict(sys.to_json_dict())
    assert np.allclose(back.kappa, sys.kappa) and np.allclose(back.phi0, sys.phi0)
    assert all(np.allclose(a.coeffs, b.coeffs) for a, b in zip(back.phi, sys.phi))
    with pytest.raises(ValueError):
        sys.kappa[0] = 2.0


def test_zero_reflections_give_monomials():
    sys = build_from_reflections(np.zeros(5))
    for n in range(6):
        assert np.allclose(sys.phi[n].coeffs, np.eye(n + 1)[n])
