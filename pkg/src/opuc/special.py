"""Scalar special-function kernels: shifted factorials, Bessel I, terminating
2F1 and Jacobi polynomials."""
import math

import numpy as np

from .errors import DomainError, PoleInParameter
from .poly import as_qreal

__all__ = [
    "kahan_sum",
    "pochhammer",
    "q_pochhammer",
    "q_pochhammer_multi",
    "bessel_i",
    "hyp2f1_terminating",
    "hyp2f1_coeffs",
    "jacobi_p",
    "jacobi_laurent",
]

BESSEL_T_MAX = 50.0


def kahan_sum(values):
    """Compensated sum of real or complex values, in the given order."""
    s_re = c_re = 0.0
    s_im = c_im = 0.0
    for v in values:
        v = complex(v)
        y = v.real - c_re
        t = s_re + y
        c_re = (t - s_re) - y
        s_re = t
        y = v.imag - c_im
        t = s_im + y
        c_im = (t - s_im) - y
        s_im = t
    return complex(s_re, s_im)


def pochhammer(a, n):
    """Rising factorial ``(a)_n = a (a+1) ... (a+n-1)``."""
    if n < 0:
        raise DomainError("pochhammer needs n >= 0")
    out = 1.0
    for k in range(n):
        out *= a + k
    return out


def q_pochhammer(a, q, n=math.inf):
    """``(a; q)_n``; ``n = inf`` truncates once ``|a q^k|`` drops below 1e-17."""
    q = as_qreal(q).q
    out = 1.0
    if n == math.inf:
        if np.ndim(a):
            term = np.array(a, dtype=np.result_type(a, float))
            out = np.ones_like(term)
            while np.max(np.abs(term)) >= 1e-17:
                out *= 1.0 - term
                term *= q
            return out
        term = a
        # |q| < 1 guaranteed by QReal
        while abs(term) >= 1e-17:
            out *= 1.0 - term
            term *= q
        return out
    if n < 0:
        raise DomainError("q_pochhammer needs n >= 0")
    term = a
    for _ in range(int(n)):
        out *= 1.0 - term
        term *= q
    return out


def q_pochhammer_multi(args, q, n=math.inf):
    out = 1.0
    for a in args:
        out *= q_pochhammer(a, q, n)
    return out


def bessel_i(nu, t):
    """Modified Bessel function ``I_nu(t)`` of integer order by its ascending series."""
    nu = abs(int(nu))
    t = float(t)
    if abs(t) > BESSEL_T_MAX:
        raise DomainError(f"bessel_i uses the ascending series only, |t| <= {BESSEL_T_MAX}")
    half = 0.5 * t
    term = 1.0
    for k in range(1, nu + 1):
        term *= half / k
    if term == 0.0:
        return 0.0
    x2 = half * half
    terms = [term]
    total = term
    k = 0
    while True:
        k += 1
        term *= x2 / (k * (k + nu))
        terms.append(term)
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return kahan_sum(terms).real


def hyp2f1_coeffs(n, b, c):
    """Monomial coefficients of ``2F1(-n, b; c; z)`` as a polynomial in z."""
    if n < 0:
        raise DomainError("terminating 2F1 needs n >= 0")
    coeffs = np.empty(n + 1, dtype=np.float64)
    term = 1.0
    coeffs[0] = 1.0
    for k in range(n):
        den = c + k
        if den == 0.0:
            raise PoleInParameter(f"c = {c} hits a pole of (c)_k within the summation range")
        term *= (-n + k) * (b + k) / (den * (k + 1))
        coeffs[k + 1] = term
    return coeffs


def hyp2f1_terminating(n, b, c, z):
    coeffs = hyp2f1_coeffs(n, b, c)
    z = complex(z)
    powers = z ** np.arange(n + 1)
    return kahan_sum(coeffs * powers)


def jacobi_p(n, alpha, beta, x):
    """Jacobi polynomial ``P_n^(alpha, beta)(x)`` by the three-term recurrence in n."""
    if alpha <= -1 or beta <= -1:
        raise DomainError("jacobi_p needs alpha, beta > -1")
    if n == 0:
        return 1.0 + 0 * x
    p_prev = 1.0 + 0 * x
    p = (alpha + 1) + (alpha + beta + 2) * (x - 1) / 2
    ab = alpha + beta
    for m in range(2, n + 1):
        c2m = 2 * m + ab
        a1 = 2 * m * (m + ab) * (c2m - 2)
        a2 = (c2m - 1) * (c2m * (c2m - 2) * x + alpha * alpha - beta * beta)
        a3 = 2 * (m + alpha - 1) * (m + beta - 1) * c2m
        p_prev, p = p, (a2 * p - a3 * p_prev) / a1
    return p


def jacobi_laurent(n, alpha, beta):
    """Laurent coefficients of ``P_n(x)`` under ``x = (z + 1/z)/2``.

    Entry ``k`` of the returned array is the coefficient of ``z**(k - n)``.
    The recurrence runs directly on Laurent arrays, so no monomial-in-x
    expansion (and its cancellation) is involved.
    """
    if alpha <= -1 or beta <= -1:
        raise DomainError("jacobi_laurent needs alpha, beta > -1")
    if n < 0:
        return np.zeros(1)

    def times_x(arr):
        # arr has offset m (length 2m+1); result has offset m+1
        out = np.zeros(arr.size + 2)
        out[2:] += 0.5 * arr
        out[:-2] += 0.5 * arr
        return out

    def pad(arr):
        out = np.zeros(arr.size + 2)
        out[1:-1] = arr
        return out

    p_prev = np.array([1.0])
    if n == 0:
        return p_prev
    p = times_x(p_prev) * (alpha + beta + 2) / 2
    p[1] += (alpha + 1) - (alpha + beta + 2) / 2
    ab = alpha + beta
    for m in range(2, n + 1):
        c2m = 2 * m + ab
        a1 = 2 * m * (m + ab) * (c2m - 2)
        nxt = (c2m - 1) * c2m * (c2m - 2) * times_x(p)
        nxt += (c2m - 1) * (alpha * alpha - beta * beta) * pad(p)
        nxt -= 2 * (m + alpha - 1) * (m + beta - 1) * c2m * pad(pad(p_prev))
        p_prev, p = p, nxt / a1
    return p
