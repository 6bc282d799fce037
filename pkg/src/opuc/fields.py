"""External fields v (w = exp(-v)) and q-fields u (D_q w(z) = -u(qz) w(qz)).

Each field carries its divided difference in closed form, so the removable
singularity at zeta = z never goes through floating-point cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .moments import Family, WeightSpec
from .poly import as_qreal
from .special import bessel_i

__all__ = [
    "ExternalField",
    "QField",
    "field_for",
    "lebesgue_field",
    "cj_field",
    "sz_field",
    "mb_field",
    "rs_qfield",
    "cj_qfield",
    "qfield_for",
    "generic_divided_difference",
]


@dataclass(frozen=True)
class ExternalField:
    name: str
    vprime: Callable
    divided_difference: Callable  # (z, zeta) -> (v'(z) - v'(zeta))/(z - zeta)
    log_weight: Callable | None = None  # analytic continuation of log w = -v
    vsecond: Callable | None = None


@dataclass(frozen=True)
class QField:
    name: str
    q: float
    u: Callable
    q_divided_difference: Callable  # (z, zeta) -> (u(zeta) - u(qz))/(zeta - qz)


def generic_divided_difference(vprime):
    """Divided difference from v' alone; only for points that never coincide."""

    def dd(z, zeta):
        z = np.asarray(z, dtype=np.complex128)
        zeta = np.asarray(zeta, dtype=np.complex128)
        return (vprime(z) - vprime(zeta)) / (z - zeta)

    return dd


def lebesgue_field():
    def zero(z, zeta=0j):
        return np.zeros(np.broadcast(np.asarray(z), np.asarray(zeta)).shape, dtype=np.complex128)

    def log_weight(z):
        return np.full(np.shape(z), -math.log(2 * math.pi) + 0j)

    return ExternalField("lebesgue", zero, zero, log_weight, zero)


def cj_field(a):
    a = float(a)
    log_c = math.lgamma(a + 1) * 2 - math.lgamma(2 * a + 1) - math.log(2 * math.pi)

    def vprime(z):
        z = np.asarray(z, dtype=np.complex128)
        return a / z + 2 * a / (1 - z)

    def vsecond(z):
        z = np.asarray(z, dtype=np.complex128)
        return -a / z**2 + 2 * a / (1 - z) ** 2

    def dd(z, zeta):
        z = np.asarray(z, dtype=np.complex128)
        zeta = np.asarray(zeta, dtype=np.complex128)
        return -a / (z * zeta) + 2 * a / ((1 - z) * (1 - zeta))

    def log_weight(z):
        # |1 - z|^{2a} continued as z^{-a} (1 - z)^a (z - 1)^a
        z = np.asarray(z, dtype=np.complex128)
        return log_c - a * np.log(z) + a * np.log(1 - z) + a * np.log(z - 1)

    return ExternalField(f"cj(a={a:g})", vprime, dd, log_weight, vsecond)


def sz_field(a, b):
    a = float(a)
    b = float(b)
    log_c = (-1 - 2 * a - 2 * b) * math.log(2) + math.lgamma(a + b + 1) \
        - math.lgamma(a + 0.5) - math.lgamma(b + 0.5)

    def vprime(z):
        z = np.asarray(z, dtype=np.complex128)
        return (a + b) / z + 2 * a / (1 - z) - 2 * b / (1 + z)

    def vsecond(z):
        z = np.asarray(z, dtype=np.complex128)
        return -(a + b) / z**2 + 2 * a / (1 - z) ** 2 + 2 * b / (1 + z) ** 2

    def dd(z, zeta):
        z = np.asarray(z, dtype=np.complex128)
        zeta = np.asarray(zeta, dtype=np.complex128)
        return (-(a + b) / (z * zeta) + 2 * a / ((1 - z) * (1 - zeta))
                + 2 * b / ((1 + z) * (1 + zeta)))

    def log_weight(z):
        z = np.asarray(z, dtype=np.complex128)
        return (log_c - (a + b) * np.log(z) + a * np.log(1 - z) + a * np.log(z - 1)
                + 2 * b * np.log(1 + z))

    return ExternalField(f"sz(a={a:g},b={b:g})", vprime, dd, log_weight, vsecond)


def mb_field(t):
    t = float(t)
    log_c = -math.log(2 * math.pi * bessel_i(0, t))

    def vprime(z):
        z = np.asarray(z, dtype=np.complex128)
        return -0.5 * t * (1 - 1 / z**2)

    def vsecond(z):
        z = np.asarray(z, dtype=np.complex128)
        return -t / z**3

    def dd(z, zeta):
        z = np.asarray(z, dtype=np.complex128)
        zeta = np.asarray(zeta, dtype=np.complex128)
        return -0.5 * t * (1 / (z * zeta**2) + 1 / (z**2 * zeta))

    def log_weight(z):
        z = np.asarray(z, dtype=np.complex128)
        return log_c + 0.5 * t * (z + 1 / z)

    return ExternalField(f"mb(t={t:g})", vprime, dd, log_weight, vsecond)


def rs_qfield(q):
    q = as_qreal(q)
    qq, s = q.q, q.sqrt_q

    def u(z):
        z = np.asarray(z, dtype=np.complex128)
        return s / (1 - qq) + qq / ((1 - qq) * z)

    def qdd(z, zeta):
        z = np.asarray(z, dtype=np.complex128)
        zeta = np.asarray(zeta, dtype=np.complex128)
        return -1.0 / ((1 - qq) * zeta * z)

    return QField(f"rs(q={qq:g})", qq, u, qdd)


def cj_qfield(a, q):
    """q-field of the continued circular Jacobi weight, from w(z) = w(qz)[1 - (1-q) z u(qz)].

    Only used for the q -> 1 comparison with the classical field; the weight
    is not analytic in the annulus, so the q-theorems need not hold exactly.
    """
    a = float(a)
    q = as_qreal(q).q

    def u(y):
        y = np.asarray(y, dtype=np.complex128)
        ratio = (q - y) / (1 - y)
        # q^{-a} ratio^{2a} - 1 loses digits as q -> 1; expm1 keeps them
        expo = np.expm1(-a * math.log(q) + 2 * a * np.log(ratio))
        return -q * expo / ((1 - q) * y)

    def qdd(z, zeta):
        z = np.asarray(z, dtype=np.complex128)
        zeta = np.asarray(zeta, dtype=np.complex128)
        return (u(zeta) - u(q * z)) / (zeta - q * z)

    return QField(f"cj-q(a={a:g},q={q:g})", q, u, qdd)


def field_for(weight: WeightSpec):
    fam = weight.family
    if fam is Family.LEBESGUE:
        return lebesgue_field()
    if fam is Family.CIRCULAR_JACOBI:
        return cj_field(weight.a)
    if fam is Family.SZEGO:
        return sz_field(weight.a, weight.b)
    if fam is Family.MODIFIED_BESSEL:
        return mb_field(weight.t)
    raise DomainError(f"no classical external field for the {fam.value} weight")


def qfield_for(weight: WeightSpec):
    if weight.family is Family.ROGERS_SZEGO:
        return rs_qfield(weight.q)
    raise DomainError(f"no q-field for the {weight.family.value} weight")
