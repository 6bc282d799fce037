import numpy as np
import pytest

from opuc.fields import cj_qfield, field_for, generic_divided_difference, rs_qfield
from opuc.moments import WeightSpec
from opuc.special import q_pochhammer

FIELDS = [WeightSpec.circular_jacobi(0.7), WeightSpec.szego(1.0, 0.5), WeightSpec.modified_bessel(1.3)]
Z = np.array([0.3 + 0.2j, -0.4 + 0.1j, 0.1 - 0.5j])


@pytest.mark.parametrize("w", FIELDS, ids=lambda w: w.label())
def test_vprime_is_minus_log_weight_derivative(w):
    f = field_for(w)
    h = 1e-5
    d = (f.log_weight(Z + h) - f.log_weight(Z - h)) / (2 * h)
    assert np.allclose(f.vprime(Z), -d, rtol=1e-8)


@pytest.mark.parametrize("w", FIELDS, ids=lambda w: w.label())
def test_log_weight_continues_the_density(w):
    f = field_for(w)
    th = np.linspace(-3.0, 3.0, 11) + 0.05
    assert np.allclose(np.abs(np.exp(f.log_weight(np.exp(1j * th)))), w.density(th), rtol=1e-12)


@pytest.mark.parametrize("w", FIELDS, ids=lambda w: w.label())
def test_divided_difference(w):
    f = field_for(w)
    zeta = np.exp(1j * np.array([0.4, 2.0, -1.1]))
    ref = generic_divided_difference(f.vprime)(Z, zeta)
    assert np.allclose(f.divided_difference(Z, zeta), ref, rtol=1e-12)
    # removable point: the closed form gives v'' where the quotient is 0/0
    if f.vsecond is not None:
        assert np.allclose(f.divided_difference(Z, Z), f.vsecond(Z), rtol=1e-12)


def test_rogers_szego_q_field_relation():
    q = 0.4
    s = np.sqrt(q)
    qf = rs_qfield(q)

    def w(z):
        return q_pochhammer(s * z, q) * q_pochhammer(s / z, q)

    z = np.array([0.9 * np.exp(0.3j), 1.1 * np.exp(-2j), np.exp(1j)])
    dq = (w(z) - w(q * z)) / ((1 - q) * z)
    assert np.allclose(dq, -qf.u(q * z) * w(q * z), rtol=1e-12)
    zeta = np.exp(1j * np.array([0.1, 1.5]))
    ref = (qf.u(zeta) - qf.u(q * Z[:2])) / (zeta - q * Z[:2])
    assert np.allclose(qf.q_divided_difference(Z[:2], zeta), ref, rtol=1e-12)


def test_cj_q_field_tends_to_classical():
    a = 1.0
    f = field_for(WeightSpec.circular_jacobi(a))
    z = np.array([0.3 + 0.1j, -0.2j])
    for q, tol in ((1 - 1e-4, 1e-2), (1 - 1e-7, 1e-5)):
        u = cj_qfield(a, q).u(z)
        assert np.max(np.abs(u - f.vprime(z)) / np.abs(f.vprime(z))) < tol
