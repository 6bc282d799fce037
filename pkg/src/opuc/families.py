"""Closed forms for the circular Jacobi, Szego, modified Bessel and
Rogers-Szego systems, their ladder pairs, and builders for the three
independent construction routes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParameters, DomainError, PoleInParameter
from .ladder import LadderKind, LadderPair, RationalFunction
from .mbessel import mb_dpii_solve, mb_system_toeplitz
from .moments import Family, WeightSpec, system_from_moments, trig_moments
from .poly import ComplexPoly, as_qreal
from .special import hyp2f1_coeffs, jacobi_laurent, pochhammer, q_pochhammer
from .system import OPUCSystem, Route, build_from_phi0, build_from_reflections

__all__ = [
    "cj_kappa",
    "cj_phi0",
    "cj_ell",
    "cj_coeffs",
    "cj_coeffs_direct",
    "cj_phistar_coeffs",
    "cj_system",
    "cj_ladder",
    "cj_P",
    "cj_Q",
    "cj_diff_residual",
    "hyp_diff_residual",
    "SzegoMapCoeffs",
    "sz_coeffs",
    "sz_kappa",
    "sz_phi0",
    "sz_ell",
    "sz_poly_coeffs",
    "sz_phistar_coeffs",
    "sz_system",
    "sz_three_term_residuals",
    "sz_ladder",
    "sz_P",
    "sz_Q",
    "sz_fe_rhs",
    "mb_ladder_closed",
    "mb_trailing_terms",
    "rs_H_coeffs",
    "rs_system",
    "rs_ladder",
    "closed_system",
    "closed_ladder",
    "recurrence_system",
    "moment_system",
    "system_for",
]


CJ_POLE_GUARD = 1e-3


def _log_sqrt_norm_cj(a, n):
    # log sqrt(n! (2a+1)_n)
    return 0.5 * (math.lgamma(n + 1) + math.lgamma(2 * a + 1 + n) - math.lgamma(2 * a + 1))


# --------------------------------------------------------------------------
# circular Jacobi
# --------------------------------------------------------------------------

def _check_cj(a):
    if not a > -0.5:
        raise DomainError(f"circular Jacobi needs a > -1/2, got a={a}")


def cj_kappa(a, n):
    _check_cj(a)
    return pochhammer(a + 1, n) * math.exp(-_log_sqrt_norm_cj(a, n))


def cj_phi0(a, n):
    return a / (n + a) * cj_kappa(a, n)


def cj_ell(a, n):
    return n * a / (n + a) * cj_kappa(a, n)


def cj_coeffs(a, n):
    """Monomial coefficients of phi_n from the terminating 2F1 form.

    At a = 0 the 2F1 has a pole in its lower parameter, and for small |a| the
    cancellation costs about eps/|a|, so there the pole-free form is used.
    """
    _check_cj(a)
    if n == 0:
        return np.array([1.0 + 0j])
    if abs(a) < CJ_POLE_GUARD:
        return cj_coeffs_direct(a, n)
    try:
        h = hyp2f1_coeffs(n, a + 1, 1 - n - a)
    except PoleInParameter:
        return cj_coeffs_direct(a, n)
    return (pochhammer(a, n) * math.exp(-_log_sqrt_norm_cj(a, n)) * h).astype(np.complex128)


def cj_coeffs_direct(a, n):
    """Pole-free form: coefficient of z^k is C(n,k) (a)_{n-k} (a+1)_k / sqrt(n! (2a+1)_n)."""
    _check_cj(a)
    s = math.exp(-_log_sqrt_norm_cj(a, n))
    return np.array([math.comb(n, k) * pochhammer(a, n - k) * pochhammer(a + 1, k) * s
                     for k in range(n + 1)], dtype=np.complex128)


def cj_phistar_coeffs(a, n):
    _check_cj(a)
    if n == 0:
        return np.array([1.0 + 0j])
    h = hyp2f1_coeffs(n, a, -n - a)
    return (cj_kappa(a, n) * h).astype(np.complex128)


def cj_system(a, N):
    _check_cj(a)
    polys = [ComplexPoly(cj_coeffs(a, n)) for n in range(N + 1)]
    stars = [ComplexPoly(cj_phistar_coeffs(a, n)) for n in range(N + 1)]
    return OPUCSystem.from_polys(polys, WeightSpec.circular_jacobi(a), Route.CLOSED_FORM,
                                 {"family": "cj", "a": float(a)}, stars)


def cj_ladder(a, n):
    if n == 0:
        return LadderPair.zero(0)
    den = ComplexPoly([1.0, -1.0])
    A = RationalFunction(ComplexPoly([math.sqrt(n * (n + 2 * a))]), den)
    B = RationalFunction(ComplexPoly([float(n)]), den)
    return LadderPair(n, A, B, LadderKind.CLOSED_FORM)


def cj_P(a, n, z):
    z = np.asarray(z, dtype=np.complex128)
    return (1 - n - a) / z - (2 * a + 1) / (1 - z)


def cj_Q(a, n, z):
    z = np.asarray(z, dtype=np.complex128)
    return n * (a + 1) / (z * (1 - z))


def cj_diff_residual(sys, a, n, z_samples):
    """(1 - z) phi_n' + n phi_n - sqrt(n(n+2a)) phi_{n-1}, relative."""
    z = np.asarray(z_samples, dtype=np.complex128)
    t1 = (1 - z) * sys.phi[n].derivative()(z)
    t2 = n * sys.phi[n](z)
    t3 = math.sqrt(n * (n + 2 * a)) * sys.phi[n - 1](z)
    scale = max(np.max(np.abs(t1)), np.max(np.abs(t2)), np.max(np.abs(t3)))
    return float(np.max(np.abs(t1 + t2 - t3)) / scale)


def hyp_diff_residual(a, n, z_samples):
    """Contiguous relation for (1 - z) d/dz 2F1(-n, a+1; 1-n-a; z)."""
    z = np.asarray(z_samples, dtype=np.complex128)
    F = ComplexPoly(hyp2f1_coeffs(n, a + 1, 1 - n - a))
    G = ComplexPoly(hyp2f1_coeffs(n - 1, a + 1, 2 - n - a))
    lhs = (1 - z) * F.derivative()(z)
    r1 = n * (n + 2 * a) / (n - 1 + a) * G(z)
    r2 = n * F(z)
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(r1)), np.max(np.abs(r2)))
    return float(np.max(np.abs(lhs - r1 + r2)) / scale)


# --------------------------------------------------------------------------
# Szego
# --------------------------------------------------------------------------

def _check_sz(a, b):
    if not (a > -0.5 and b > -0.5):
        raise DomainError(f"Szego weight needs a, b > -1/2, got a={a}, b={b}")


@dataclass(frozen=True)
class SzegoMapCoeffs:
    A: float
    B: float
    C: float
    D: float


def sz_coeffs(n, a, b):
    """Coefficients of the Jacobi-polynomial representation at half-index n >= 1."""
    _check_sz(a, b)
    if n < 1:
        raise DomainError("Szego map coefficients need n >= 1")
    ah, bh = pochhammer(a + 0.5, n), pochhammer(b + 0.5, n)
    A = math.sqrt(math.factorial(n) * pochhammer(a + b + 1, n) / (ah * bh))
    C = n * math.sqrt(math.factorial(n - 1) * pochhammer(a + b + 1, n - 1) / (ah * bh))
    return SzegoMapCoeffs(A, A / 2, C, (n + a + b) / (2 * n) * C)


def sz_kappa(a, b, m):
    _check_sz(a, b)
    if m == 0:
        return 1.0
    n = (m + 1) // 2
    if m % 2 == 0:
        den = math.factorial(n) * pochhammer(a + b + 1, n) * pochhammer(a + 0.5, n) * pochhammer(b + 0.5, n)
        return 2.0 ** (-2 * n) * pochhammer(a + b + 1, 2 * n) / math.sqrt(den)
    den = (math.factorial(n - 1) * pochhammer(a + b + 1, n - 1)
           * pochhammer(a + 0.5, n) * pochhammer(b + 0.5, n))
    return 2.0 ** (1 - 2 * n) * pochhammer(a + b + 1, 2 * n - 1) / math.sqrt(den)


def sz_phi0(a, b, m):
    if m == 0:
        return 1.0
    c = (a + b) if m % 2 == 0 else (a - b)
    return c / (m + a + b) * sz_kappa(a, b, m)


def sz_ell(a, b, m):
    # the even and odd formulas share the form m (a - b)/(m + a + b) kappa_m
    if m == 0:
        return 0.0
    return m * (a - b) / (m + a + b) * sz_kappa(a, b, m)


def _laurent_parts(n, a, b):
    """P_n^{(a-1/2,b-1/2)} and (z - 1/z) P_{n-1}^{(a+1/2,b+1/2)}, both with offset n."""
    p = jacobi_laurent(n, a - 0.5, b - 0.5)
    q = jacobi_laurent(n - 1, a + 0.5, b + 0.5)
    t = np.zeros(2 * n + 1)
    t[2:] += q
    t[:-2] -= q
    return p, t


def sz_poly_coeffs(a, b, m):
    """Monomial coefficients of phi_m built from the Laurent expansion in z."""
    _check_sz(a, b)
    if m == 0:
        return np.array([1.0 + 0j])
    n = (m + 1) // 2
    c = sz_coeffs(n, a, b)
    p, t = _laurent_parts(n, a, b)
    if m % 2 == 0:
        # z^n times a Laurent polynomial with offset n: powers 0..2n
        return (c.A * p + 0.5 * c.B * t).astype(np.complex128)
    # z^{n-1} times offset n: the z^{-1} entry vanishes and is dropped
    lau = c.C * p + 0.5 * c.D * t
    return lau[1:].astype(np.complex128)


def sz_phistar_coeffs(a, b, m):
    _check_sz(a, b)
    if m == 0:
        return np.array([1.0 + 0j])
    n = (m + 1) // 2
    c = sz_coeffs(n, a, b)
    p, t = _laurent_parts(n, a, b)
    if m % 2 == 0:
        return (c.A * p - 0.5 * c.B * t).astype(np.complex128)
    # z^{1-n} phi* = z (C P_n - D/2 (z - 1/z) P_{n-1}): multiply offset-n array by z^n
    lau = c.C * p - 0.5 * c.D * t
    return lau[:-1].astype(np.complex128)


def sz_system(a, b, N):
    _check_sz(a, b)
    polys = [ComplexPoly(sz_poly_coeffs(a, b, m)) for m in range(N + 1)]
    stars = [ComplexPoly(sz_phistar_coeffs(a, b, m)) for m in range(N + 1)]
    return OPUCSystem.from_polys(polys, WeightSpec.szego(a, b), Route.CLOSED_FORM,
                                 {"family": "sz", "a": float(a), "b": float(b)}, stars)


def sz_three_term_residuals(sys, a, b, n):
    """Coefficientwise relative residuals of the two half-index three-term recurrences.

    The first links phi_{2n}, phi_{2n-1}, phi_{2n-2} (n >= 1); the second
    phi_{2n-1}, phi_{2n-2}, phi_{2n-3} (n >= 2, returned as None for n = 1).
    """
    P = sys.phi
    s1 = math.sqrt((n + a - 0.5) * (n + b - 0.5))

    def rel(lhs_terms, rhs, deg):
        res = sum(lhs_terms[1:], lhs_terms[0]) - rhs
        scale = max(max(t.max_abs() for t in lhs_terms), rhs.max_abs())
        return float(np.max(np.abs(res.padded(deg))) / scale)

    lhs = [2 * (a - b) * math.sqrt(n * (n + a + b)) * P[2 * n],
           2 * (a + b) * s1 * P[2 * n - 2].shift(1)]
    rhs = ((a + b) * (2 * n + a + b - 1) * P[2 * n - 1]
           + (a - b) * (2 * n + a + b) * P[2 * n - 1].shift(1))
    r1 = rel(lhs, rhs, 2 * n)
    r2 = None
    if n >= 2:
        lhs = [2 * (a + b) * s1 * P[2 * n - 1],
               2 * (a - b) * math.sqrt((n - 1) * (n + a + b - 1)) * P[2 * n - 3].shift(1)]
        rhs = ((a - b) * (2 * n + a + b - 2) * P[2 * n - 2]
               + (a + b) * (2 * n + a + b - 1) * P[2 * n - 2].shift(1))
        r2 = rel(lhs, rhs, 2 * n - 1)
    return r1, r2


def sz_ladder(a, b, m):
    _check_sz(a, b)
    if m == 0:
        return LadderPair.zero(0)
    n = (m + 1) // 2
    if m % 2:
        if a == b:
            raise DegenerateParameters("odd-index Szego ladder divides by a - b")
        den = ComplexPoly([a - b, 0.0, -(a - b)])
        s = 2 * math.sqrt((n + a - 0.5) * (n + b - 0.5))
        A = RationalFunction(ComplexPoly([s * (a - b), s * (a + b)]), den)
        B = RationalFunction(ComplexPoly([4 * a * b + m * (a + b), m * (a - b)]), den)
    else:
        if a + b == 0:
            raise DegenerateParameters("even-index Szego ladder divides by a + b")
        den = ComplexPoly([a + b, 0.0, -(a + b)])
        s = 2 * math.sqrt(n * (n + a + b))
        A = RationalFunction(ComplexPoly([s * (a + b), s * (a - b)]), den)
        B = RationalFunction(ComplexPoly([2 * n * (a - b), 2 * n * (a + b)]), den)
    return LadderPair(m, A, B, LadderKind.CLOSED_FORM)


def sz_P(a, b, m, z):
    z = np.asarray(z, dtype=np.complex128)
    base = -(m + a + b - 1) / z - (2 * a + 1) / (1 - z) + (2 * b + 1) / (1 + z)
    if m % 2:
        return base - (a + b) / (a - b + (a + b) * z)
    return base - (a - b) / (a + b + (a - b) * z)


def sz_Q(a, b, m, z):
    z = np.asarray(z, dtype=np.complex128)
    if m % 2 == 0:
        num = m * (a * (a + 1) * (1 + z) ** 2 - b * (b + 1) * (1 - z) ** 2)
        return num / (z * (1 - z * z) * (a + b + (a - b) * z))
    num = (m * (a * (a + 1) * (1 + z) ** 2 + b * (b + 1) * (1 - z) ** 2 - 2 * a * b * (1 - z * z))
           + 4 * a * b)
    return num / (z * (1 - z * z) * (a - b + (a + b) * z))


def sz_fe_rhs(a, b, n, z):
    z = np.asarray(z, dtype=np.complex128)
    return -(n - 1) / z - (a + b) / z - 2 * a / (1 - z) + 2 * b / (1 + z)


# --------------------------------------------------------------------------
# modified Bessel: ladder pair in terms of the system's coefficients
# --------------------------------------------------------------------------

def mb_ladder_closed(sys, t, n):
    """A_n, B_n of the differential-difference relation, from kappa and phi(0)."""
    if n == 0:
        return LadderPair.zero(0)
    if n + 1 > sys.N:
        raise DomainError("the closed modified Bessel ladder needs phi_{n+1}(0)")
    sys.require_nonzero_phi0(n)
    k, p0 = sys.kappa, sys.phi0
    ratio = k[n - 1] / k[n]
    pr = p0[n - 1] / p0[n]
    const = n + 0.5 * t * ratio * pr - 0.5 * t * np.conj(p0[n + 1]) * p0[n] / (k[n + 1] * k[n])
    z1 = ComplexPoly([0.0, 1.0])
    A = RationalFunction(ComplexPoly([ratio * 0.5 * t, ratio * const]), z1)
    B = RationalFunction(ComplexPoly([0.5 * t * ratio * pr]), z1)
    return LadderPair(n, A, B, LadderKind.CLOSED_FORM)


def mb_trailing_terms(sys, t, n):
    """The three z-independent terms of the reduced functional equation (should be t/2)."""
    if n < 2:
        raise DomainError("needs n >= 2")
    sys.require_nonzero_phi0(n)
    k, p0 = sys.kappa, sys.phi0
    terms = [-(n - 1) * k[n] / k[n - 1] * p0[n - 1] / p0[n],
             -0.5 * t * k[n] * k[n - 2] / k[n - 1] ** 2 * p0[n - 2] / p0[n],
             0.5 * t * p0[n - 1] ** 2 / k[n - 1] ** 2]
    return complex(sum(terms)), terms


# --------------------------------------------------------------------------
# Rogers-Szego
# --------------------------------------------------------------------------

def rs_H_coeffs(q, n):
    """Coefficients of H_n(z|q) = sum_k (q;q)_n q^{-k/2} z^k / ((q;q)_k (q;q)_{n-k})."""
    q = as_qreal(q)
    qq = q.q
    qn = q_pochhammer(qq, qq, n)
    return np.array([qn * q.sqrt_q ** (-k) / (q_pochhammer(qq, qq, k) * q_pochhammer(qq, qq, n - k))
                     for k in range(n + 1)], dtype=np.complex128)


def rs_system(q, N):
    q = as_qreal(q)
    polys = []
    for n in range(N + 1):
        scale = q.sqrt_q ** n / math.sqrt(q_pochhammer(q.q, q.q, n))
        polys.append(ComplexPoly(scale * rs_H_coeffs(q, n)))
    return OPUCSystem.from_polys(polys, WeightSpec.rogers_szego(q.q), Route.CLOSED_FORM,
                                 {"family": "rs", "q": q.q})


def rs_ladder(q, n):
    q = as_qreal(q).q
    if n == 0:
        return LadderPair.zero(0)
    A = RationalFunction.constant(math.sqrt(1 - q**n) / (1 - q))
    return LadderPair(n, A, RationalFunction.constant(0.0), LadderKind.CLOSED_FORM)


# --------------------------------------------------------------------------
# routes
# --------------------------------------------------------------------------

def closed_system(weight: WeightSpec, N):
    fam = weight.family
    if fam is Family.LEBESGUE:
        polys = [ComplexPoly.monomial(n) for n in range(N + 1)]
        return OPUCSystem.from_polys(polys, weight, Route.CLOSED_FORM, {"family": "lebesgue"})
    if fam is Family.CIRCULAR_JACOBI:
        return cj_system(weight.a, N)
    if fam is Family.SZEGO:
        return sz_system(weight.a, weight.b, N)
    if fam is Family.MODIFIED_BESSEL:
        return mb_system_toeplitz(weight.t, N)[0]
    if fam is Family.ROGERS_SZEGO:
        return rs_system(weight.q, N)
    raise DomainError(f"no closed form for the {fam.value} weight")


def _closed_phi0(weight, N):
    fam = weight.family
    if fam is Family.LEBESGUE:
        return np.zeros(N)
    if fam is Family.CIRCULAR_JACOBI:
        return np.array([cj_phi0(weight.a, n) for n in range(1, N + 1)])
    if fam is Family.SZEGO:
        return np.array([sz_phi0(weight.a, weight.b, m) for m in range(1, N + 1)])
    if fam is Family.ROGERS_SZEGO:
        q = weight.q
        return np.array([q ** (n / 2) / math.sqrt(q_pochhammer(q, q, n)) for n in range(1, N + 1)])
    raise DomainError(f"no closed phi_n(0) sequence for the {fam.value} weight")


def recurrence_system(weight: WeightSpec, N):
    """Szego recurrence fed with the family's constant terms.

    For the modified Bessel weight the reflection coefficients come from the
    discrete Painleve II boundary-value solve instead.
    """
    if weight.family is Family.MODIFIED_BESSEL:
        seq = mb_dpii_solve(weight.t, N)
        sys = build_from_reflections(seq.r[1:], weight)
    else:
        sys = build_from_phi0(_closed_phi0(weight, N), 1.0, weight)
    return OPUCSystem.from_polys(sys.phi, weight, Route.SZEGO_RECURRENCE, {"family": weight.family.value})


def moment_system(weight: WeightSpec, N, M=None):
    return system_from_moments(trig_moments(weight, N, M), N)


def system_for(weight: WeightSpec, N, route=Route.CLOSED_FORM):
    route = Route(route)
    if route is Route.CLOSED_FORM:
        return closed_system(weight, N)
    if route is Route.SZEGO_RECURRENCE:
        return recurrence_system(weight, N)
    return moment_system(weight, N)


def closed_ladder(sys: OPUCSystem, n):
    """Closed-form ladder pair for the system's weight family."""
    w = sys.weight
    fam = w.family
    if fam is Family.CIRCULAR_JACOBI:
        return cj_ladder(w.a, n)
    if fam is Family.SZEGO:
        return sz_ladder(w.a, w.b, n)
    if fam is Family.MODIFIED_BESSEL:
        return mb_ladder_closed(sys, w.t, n)
    if fam is Family.ROGERS_SZEGO:
        return rs_ladder(w.q, n)
    raise DomainError(f"no closed ladder for the {fam.value} weight")
