"""Inner loops that dominate runtime.

Every kernel exists twice: an explicit-loop version compiled with numba and
a vectorised numpy version. The public names at the bottom of the module
bind to one or the other depending on :data:`opuc._jit.HAS_NUMBA`. Both
versions implement the same arithmetic in the same order wherever the
algorithm is order dependent (Aberth, RK4), so results agree to roundoff.
"""
import numpy as np
from scipy.linalg import solve_banded

from ._jit import HAS_NUMBA, njit

__all__ = [
    "horner",
    "horner_deriv",
    "szego_build",
    "aberth",
    "rk4_reflection",
    "tridiag_solve",
]


# --------------------------------------------------------------------------
# Horner evaluation at many points
# --------------------------------------------------------------------------

@njit
def _horner_loop(coeffs, zs):
    out = np.empty(zs.shape[0], dtype=np.complex128)
    n = coeffs.shape[0]
    for i in range(zs.shape[0]):
        z = zs[i]
        acc = 0j
        for k in range(n - 1, -1, -1):
            acc = acc * z + coeffs[k]
        out[i] = acc
    return out


def _horner_np(coeffs, zs):
    acc = np.zeros(zs.shape, dtype=np.complex128)
    for c in coeffs[::-1]:
        acc = acc * zs + c
    return acc


@njit
def _horner_deriv_loop(coeffs, zs):
    # returns p(z), p'(z), p''(z)
    m = zs.shape[0]
    p = np.empty(m, dtype=np.complex128)
    dp = np.empty(m, dtype=np.complex128)
    d2p = np.empty(m, dtype=np.complex128)
    n = coeffs.shape[0]
    for i in range(m):
        z = zs[i]
        a0 = 0j
        a1 = 0j
        a2 = 0j
        for k in range(n - 1, -1, -1):
            a2 = a2 * z + a1
            a1 = a1 * z + a0
            a0 = a0 * z + coeffs[k]
        p[i] = a0
        dp[i] = a1
        d2p[i] = 2.0 * a2
    return p, dp, d2p


def _horner_deriv_np(coeffs, zs):
    a0 = np.zeros(zs.shape, dtype=np.complex128)
    a1 = np.zeros_like(a0)
    a2 = np.zeros_like(a0)
    for c in coeffs[::-1]:
        a2 = a2 * zs + a1
        a1 = a1 * zs + a0
        a0 = a0 * zs + c
    return a0, a1, 2.0 * a2


# --------------------------------------------------------------------------
# Szego recurrence: kappa_n phi_{n+1} = kappa_{n+1} z phi_n + phi_{n+1}(0) phi_n^*
# --------------------------------------------------------------------------

@njit
def _szego_loop(phi0, kappa0):
    nmax = phi0.shape[0] - 1
    coef = np.zeros((nmax + 1, nmax + 1), dtype=np.complex128)
    kappa = np.empty(nmax + 1, dtype=np.float64)
    kappa[0] = kappa0
    coef[0, 0] = kappa0
    for n in range(nmax):
        a = phi0[n + 1]
        k1 = np.sqrt(kappa[n] * kappa[n] + (a.real * a.real + a.imag * a.imag))
        kappa[n + 1] = k1
        for k in range(n + 2):
            zphi = coef[n, k - 1] if k >= 1 else 0j
            star = np.conj(coef[n, n - k]) if k <= n else 0j
            coef[n + 1, k] = (k1 * zphi + a * star) / kappa[n]
        # pin the constant and leading terms to their defining values
        coef[n + 1, 0] = a
        coef[n + 1, n + 1] = k1
    return coef, kappa


def _szego_np(phi0, kappa0):
    nmax = phi0.shape[0] - 1
    coef = np.zeros((nmax + 1, nmax + 1), dtype=np.complex128)
    kappa = np.empty(nmax + 1)
    kappa[0] = kappa0
    coef[0, 0] = kappa0
    for n in range(nmax):
        a = phi0[n + 1]
        k1 = np.sqrt(kappa[n] ** 2 + (a.real ** 2 + a.imag ** 2))
        kappa[n + 1] = k1
        zphi = np.zeros(n + 2, dtype=np.complex128)
        zphi[1:] = coef[n, : n + 1]
        star = np.zeros(n + 2, dtype=np.complex128)
        star[: n + 1] = np.conj(coef[n, n::-1])
        coef[n + 1, : n + 2] = (k1 * zphi + a * star) / kappa[n]
        coef[n + 1, 0] = a
        coef[n + 1, n + 1] = k1
    return coef, kappa


# --------------------------------------------------------------------------
# Aberth-Ehrlich, Gauss-Seidel ordering
# --------------------------------------------------------------------------

@njit
def _aberth_loop(coeffs, z0, maxiter, tol):
    z = z0.copy()
    n = z.shape[0]
    deg = coeffs.shape[0] - 1
    it = 0
    converged = False
    for it in range(1, maxiter + 1):
        worst = 0.0
        for i in range(n):
            zi = z[i]
            p = 0j
            dp = 0j
            for k in range(deg, -1, -1):
                dp = dp * zi + p
                p = p * zi + coeffs[k]
            if p == 0j:
                continue
            ratio = p / dp
            s = 0j
            for j in range(n):
                if j != i:
                    s += 1.0 / (zi - z[j])
            step = ratio / (1.0 - ratio * s)
            z[i] = zi - step
            rel = abs(step) / (1.0 + abs(z[i]))
            if rel > worst:
                worst = rel
        if worst < tol:
            converged = True
            break
    return z, it, converged


def _aberth_np(coeffs, z0, maxiter, tol):
    z = np.array(z0, dtype=np.complex128)
    n = z.shape[0]
    rev = coeffs[::-1]
    drev = (coeffs[1:] * np.arange(1, coeffs.shape[0]))[::-1]
    idx = np.arange(n)
    it = 0
    converged = False
    for it in range(1, maxiter + 1):
        worst = 0.0
        for i in range(n):
            zi = z[i]
            p = np.polyval(rev, zi)
            if p == 0:
                continue
            dp = np.polyval(drev, zi) if drev.size else 0j
            ratio = p / dp
            s = np.sum(1.0 / (zi - z[idx != i]))
            step = ratio / (1.0 - ratio * s)
            z[i] = zi - step
            worst = max(worst, abs(step) / (1.0 + abs(z[i])))
        if worst < tol:
            converged = True
            break
    return z, it, converged


# --------------------------------------------------------------------------
# RK4 for the reflection-coefficient ODE of the modified Bessel weight
# --------------------------------------------------------------------------

@njit
def _rn_rhs(n, t, r, rp):
    one_m = 1.0 - r * r
    return (0.5 * (1.0 / (r + 1.0) + 1.0 / (r - 1.0)) * rp * rp
            - rp / t - r * one_m + (n * n) / (t * t) * r / one_m)


@njit
def _rk4_loop(n, t0, r0, rp0, t_end, steps, guard):
    h = (t_end - t0) / steps
    ts = np.empty(steps + 1)
    rs = np.empty(steps + 1)
    rps = np.empty(steps + 1)
    ts[0] = t0
    rs[0] = r0
    rps[0] = rp0
    r = r0
    rp = rp0
    for k in range(steps):
        t = t0 + k * h
        k1r = rp
        k1p = _rn_rhs(n, t, r, rp)
        k2r = rp + 0.5 * h * k1p
        k2p = _rn_rhs(n, t + 0.5 * h, r + 0.5 * h * k1r, k2r)
        k3r = rp + 0.5 * h * k2p
        k3p = _rn_rhs(n, t + 0.5 * h, r + 0.5 * h * k2r, k3r)
        k4r = rp + h * k3p
        k4p = _rn_rhs(n, t + h, r + h * k3r, k4r)
        r = r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        rp = rp + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        ts[k + 1] = t0 + (k + 1) * h
        rs[k + 1] = r
        rps[k + 1] = rp
        if abs(1.0 - r * r) < guard:
            return ts[: k + 2], rs[: k + 2], rps[: k + 2], False
    return ts, rs, rps, True


def _rn_rhs_py(n, t, r, rp):
    one_m = 1.0 - r * r
    return (0.5 * (1.0 / (r + 1.0) + 1.0 / (r - 1.0)) * rp * rp
            - rp / t - r * one_m + (n * n) / (t * t) * r / one_m)


def _rk4_np(n, t0, r0, rp0, t_end, steps, guard):
    # no vectorisable axis in a single trajectory; plain scalar loop
    h = (t_end - t0) / steps
    ts = t0 + h * np.arange(steps + 1)
    rs = np.empty(steps + 1)
    rps = np.empty(steps + 1)
    rs[0], rps[0] = r0, rp0
    r, rp = r0, rp0
    f = _rn_rhs_py
    for k in range(steps):
        t = t0 + k * h
        k1r = rp
        k1p = f(n, t, r, rp)
        k2r = rp + 0.5 * h * k1p
        k2p = f(n, t + 0.5 * h, r + 0.5 * h * k1r, k2r)
        k3r = rp + 0.5 * h * k2p
        k3p = f(n, t + 0.5 * h, r + 0.5 * h * k2r, k3r)
        k4r = rp + h * k3p
        k4p = f(n, t + h, r + h * k3r, k4r)
        r = r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        rp = rp + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        rs[k + 1], rps[k + 1] = r, rp
        if abs(1.0 - r * r) < guard:
            return ts[: k + 2], rs[: k + 2], rps[: k + 2], False
    return ts, rs, rps, True


# --------------------------------------------------------------------------
# Tridiagonal solve
# --------------------------------------------------------------------------

@njit
def _thomas_loop(lower, diag, upper, rhs):
    n = diag.shape[0]
    c = np.empty(n)
    d = np.empty(n)
    c[0] = upper[0] / diag[0] if n > 1 else 0.0
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i - 1] * c[i - 1]
        if i < n - 1:
            c[i] = upper[i] / m
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / m
    x = np.empty(n)
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _thomas_np(lower, diag, upper, rhs):
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    return solve_banded((1, 1), ab, rhs)


_IMPLS = {
    "horner": (_horner_loop, _horner_np),
    "horner_deriv": (_horner_deriv_loop, _horner_deriv_np),
    "szego_build": (_szego_loop, _szego_np),
    "aberth": (_aberth_loop, _aberth_np),
    "rk4_reflection": (_rk4_loop, _rk4_np),
    "tridiag_solve": (_thomas_loop, _thomas_np),
}


def implementations(name):
    """Return ``(jit_version, numpy_version)`` for a kernel name."""
    return _IMPLS[name]


_pick = 0 if HAS_NUMBA else 1
horner = _IMPLS["horner"][_pick]
horner_deriv = _IMPLS["horner_deriv"][_pick]
szego_build = _IMPLS["szego_build"][_pick]
aberth = _IMPLS["aberth"][_pick]
rk4_reflection = _IMPLS["rk4_reflection"][_pick]
tridiag_solve = _IMPLS["tridiag_solve"][_pick]
