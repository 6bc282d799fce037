"""Modified Bessel weight exp(t cos theta)/I_0(t): Toeplitz construction,
the discrete Painleve II recurrence for the reflection coefficients, and
their evolution in t."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DomainError,
    NoConvergence,
    NumericalBreakdown,
    SingularityApproached,
)
from .moments import MomentTable, WeightSpec, system_from_moments, toeplitz_det
from .special import bessel_i
from .system import OPUCSystem, Route

__all__ = [
    "ReflectionRoute",
    "ReflectionSequence",
    "mb_moment_table",
    "mb_system_toeplitz",
    "mb_kappa2_toeplitz",
    "mb_tp123",
    "dpii_residual",
    "mb_dpii_extend",
    "mb_dpii_solve",
    "mb_coefficient_odes",
    "mb_rn_seed",
    "mb_rn_ode_trajectory",
    "mb_rn_ode_integrate",
    "mb_quad_kappa2",
    "xfm",
]


class ReflectionRoute(str, enum.Enum):
    TOEPLITZ = "ToeplitzDet"
    DPII = "DPII"
    ODE = "ODE"


@dataclass(frozen=True)
class ReflectionSequence:
    """r_0 ... r_N with r_n = phi_n(0)/kappa_n and r_0 = 1."""

    t: float
    r: np.ndarray
    route: ReflectionRoute

    def __post_init__(self):
        self.r.setflags(write=False)

    @property
    def N(self):
        return self.r.size - 1


def mb_moment_table(t, N, normalized=True):
    """Exact moments I_j(t)/I_0(t) (or the bare I_j(t))."""
    vals = np.array([bessel_i(abs(j), t) for j in range(-N, N + 1)])
    if normalized:
        vals = vals / bessel_i(0, t)
    return MomentTable(vals.astype(np.complex128), N, 0, WeightSpec.modified_bessel(t))


def mb_system_toeplitz(t, N):
    """System from the exact Bessel moment matrix, with its reflection sequence."""
    m = mb_moment_table(t, N)
    s = system_from_moments(m, N)
    sys = OPUCSystem.from_polys(s.phi, m.weight, Route.CLOSED_FORM, {"family": "mb", "t": float(t)})
    r = np.concatenate([[1.0], sys.reflections[1:].real])
    return sys, ReflectionSequence(float(t), r, ReflectionRoute.TOEPLITZ)


def mb_kappa2_toeplitz(t, n):
    """kappa_n^2 = I_0 det(I_{j-k})_{0..n-1} / det(I_{j-k})_{0..n}, in log form."""
    m = mb_moment_table(t, n, normalized=False)
    l1, p1 = toeplitz_det(m, n)
    l2, p2 = toeplitz_det(m, n + 1)
    return math.log(bessel_i(0, t)) + l1 - l2, p1 / p2


def mb_tp123(t):
    """kappa_1^2, r_1, kappa_2^2, r_2 written out in Bessel functions."""
    I0, I1, I2 = bessel_i(0, t), bessel_i(1, t), bessel_i(2, t)
    k1 = I0**2 / (I0**2 - I1**2)
    k2 = I0 * (I0**2 - I1**2) / ((I0 - I2) * (I0 * (I0 + I2) - 2 * I1**2))
    return {"kappa1_sq": k1, "r1": -I1 / I0, "kappa2_sq": k2,
            "r2": (I0 * I2 - I1**2) / (I1**2 - I0**2)}


def dpii_residual(r, t, n):
    """|r_{n+1} + r_{n-1} + (2n/t) r_n/(1 - r_n^2)| relative to its largest term."""
    terms = [r[n + 1], r[n - 1], 2 * n / t * r[n] / (1 - r[n] ** 2)]
    scale = max(abs(x) for x in terms)
    return abs(sum(terms)) / scale


def mb_dpii_extend(seq: ReflectionSequence, N, guard=1e-12):
    """Forward iteration of the recurrence from the last two entries of ``seq``.

    The forward direction is unstable (roughly one digit lost per step at
    t = 1/2); use :func:`mb_dpii_solve` for accurate values.
    """
    t = seq.t
    if t == 0:
        raise DomainError("the recurrence divides by t")
    r = list(seq.r[:])
    if len(r) < 2:
        r = [1.0, -bessel_i(1, t) / bessel_i(0, t)]
    while len(r) <= N:
        n = len(r) - 1
        om = 1.0 - r[n] ** 2
        if abs(om) < guard:
            raise NumericalBreakdown(f"1 - r_{n}^2 = {om:.3e} underflows the guard")
        r.append(-2 * n / t * r[n] / om - r[n - 1])
    return ReflectionSequence(t, np.array(r[: N + 1], dtype=np.float64), ReflectionRoute.DPII)


def _dpii_newton(t, r, tol, maxiter):
    L = r.size + 1
    n = np.arange(1, L, dtype=np.float64)
    off = np.ones(L - 2)
    for _ in range(maxiter):
        full = np.concatenate([[1.0], r, [0.0]])
        om = 1.0 - r * r
        F = full[2:] + full[:-2] + 2 * n / t * r / om
        diag = 2 * n / t * (1 + r * r) / (om * om)
        step = kernels.tridiag_solve(off, diag, off, F)
        r = r - step
        if not np.all(np.isfinite(r)):
            break
        if np.max(np.abs(step)) <= tol * max(1.0, float(np.max(np.abs(r)))):
            return r, True, 0.0
    worst = float(np.max(np.abs(F))) if np.all(np.isfinite(F)) else float("inf")
    return r, False, worst


def mb_dpii_solve(t, N, L=None, tol=1e-15, maxiter=60):
    """The recurrence as a boundary-value problem r_0 = 1, r_L = 0, solved by Newton.

    For large n, r_n decays like (t/2)^n/n!, so pinning r_L = 0 with
    L well beyond N costs nothing at double precision. The Jacobian is
    tridiagonal and diagonally dominant for n > |t|. Beyond |t| = 1 the
    solve is continued in t from t = +-1 in steps of at most 1/2.
    """
    t = float(t)
    if t == 0:
        raise DomainError("the recurrence divides by t")
    if L is None:
        L = max(N + 20, 40, int(3 * abs(t)) + 20)
    # small-t law as the starting guess, kept away from the poles at r = +-1
    t_start = t if abs(t) <= 1 else math.copysign(1.0, t)
    r = np.array([(-t_start / 2) ** k / math.factorial(k) for k in range(1, L)], dtype=np.float64)
    r = np.clip(r, -0.5, 0.5)
    steps = max(1, int(math.ceil(abs(t - t_start) / 0.5)))
    path = [t_start] if t_start == t else list(np.linspace(t_start, t, steps + 1))
    for tk in path:
        r, ok, worst = _dpii_newton(tk, r, tol, maxiter)
        if not ok:
            raise NoConvergence(f"Newton iteration for the reflection recurrence at t={tk:g}", worst)
    if np.any(np.abs(r) >= 1):
        raise NumericalBreakdown("boundary-value solution left the unit interval")
    out = np.concatenate([[1.0], r[:N]])
    return ReflectionSequence(t, out, ReflectionRoute.DPII)


def mb_coefficient_odes(t, n, h=1e-4, z_samples=None):
    """Residuals of the t-evolution identities by central differences in t.

    Returns a dict with entries ``kappa`` (log-derivative of kappa_n),
    ``phi0`` (of phi_n(0)), ``rr1`` (r_{n+1} - r_{n-1}), ``poly`` (the
    relation for d phi_n/dt, coefficientwise) and ``lowering`` (the
    differential-difference relation in z, at the sample points).
    """
    if n < 1:
        raise DomainError("needs n >= 1")
    N = n + 2
    s0, _ = mb_system_toeplitz(t, N)
    sp, _ = mb_system_toeplitz(t + h, N)
    sm, _ = mb_system_toeplitz(t - h, N)
    k, p0, r = s0.kappa, s0.phi0.real, s0.reflections.real
    I1I0 = bessel_i(1, t) / bessel_i(0, t)

    def d(f):
        return (f(sp) - f(sm)) / (2 * h)

    out = {}
    lhs = 2 * d(lambda s: s.kappa[n]) / k[n]
    rhs = I1I0 + r[n + 1] * r[n]
    out["kappa"] = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)
    lhs = 2 * d(lambda s: s.phi0[n].real) / p0[n]
    rhs = I1I0 + r[n + 1] / r[n] - p0[n - 1] / p0[n] * k[n - 1] / k[n]
    out["phi0"] = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)
    lhs = r[n + 1] - r[n - 1]
    rhs = 2 / (1 - r[n] ** 2) * d(lambda s: s.reflections[n].real)
    out["rr1"] = abs(lhs - rhs) / max(abs(lhs), abs(rhs), abs(r[n - 1]))
    ratio = r[n + 1] / r[n]
    dphi = (sp.phi[n].padded(n) - sm.phi[n].padded(n)) / (2 * h)
    zphi = s0.phi[n - 1].shift(1).padded(n)
    rhs = ((I1I0 + ratio) * s0.phi[n].padded(n)
           - k[n - 1] / k[n] * (s0.phi[n - 1].padded(n) + ratio * zphi))
    scale = max(np.max(np.abs(2 * dphi)), np.max(np.abs(rhs)))
    out["poly"] = float(np.max(np.abs(2 * dphi - rhs)) / scale)
    # differential-difference relation in z with coefficients from the same system
    from .families import mb_ladder_closed
    from .ladder import lowering_residual

    if z_samples is None:
        z_samples = 0.5 * np.exp(2j * np.pi * (np.arange(16) + 0.5) / 16)
    out["lowering"] = lowering_residual(s0, mb_ladder_closed(s0, t, n), n, z_samples)
    return out


def mb_rn_seed(n, t0):
    """Two-term small-t series for r_n and its derivative."""
    c = (-0.5) ** n / math.factorial(n)
    r = c * t0**n * (1 - t0**2 / (4 * (n + 1)))
    rp = c * (n * t0 ** (n - 1) - (n + 2) * t0 ** (n + 1) / (4 * (n + 1)))
    return r, rp


def mb_rn_ode_trajectory(n, t_end, h=1e-4, t0=1e-2, guard=1e-10):
    if n < 1:
        raise DomainError("needs n >= 1")
    if not (0 < t_end <= 5):
        raise DomainError("t_end must lie in (0, 5]")
    if not (0 < h <= 1e-3):
        raise DomainError("step must lie in (0, 1e-3]")
    if t_end <= t0:
        raise DomainError(f"t_end must exceed the seed point {t0}")
    steps = int(math.ceil((t_end - t0) / h))
    if steps % 2:
        steps += 1  # Simpson on the trajectory needs an even count
    r0, rp0 = mb_rn_seed(n, t0)
    ts, rs, rps, ok = kernels.rk4_reflection(n, t0, r0, rp0, float(t_end), steps, guard)
    if not ok:
        raise SingularityApproached(f"|1 - r_{n}^2| fell below {guard} near t = {ts[-1]:.6g}")
    return ts, rs, rps


def mb_rn_ode_integrate(n, t_end, h=1e-4, t0=1e-2):
    """r_n(t_end) by RK4 on the second-order equation, seeded by the series at t0."""
    _, rs, _ = mb_rn_ode_trajectory(n, t_end, h, t0)
    return float(rs[-1])


def mb_quad_kappa2(n, t, h=1e-4, t0=1e-2):
    """kappa_n^2 = I_0 (1 - r_n^2)^{-1/2} exp(-n int_0^t r_n^2/(s (1 - r_n^2)) ds).

    The integral over [t0, t] uses Simpson on the RK4 trajectory; the piece
    over [0, t0] uses the leading series term.
    """
    ts, rs, _ = mb_rn_ode_trajectory(n, t, h, t0)
    f = rs**2 / (ts * (1 - rs**2))
    hh = ts[1] - ts[0]
    simpson = hh / 3 * (f[0] + f[-1] + 4 * np.sum(f[1:-1:2]) + 2 * np.sum(f[2:-1:2]))
    head = t0 ** (2 * n) / (2 * n * 4**n * math.factorial(n) ** 2)
    r = rs[-1]
    return bessel_i(0, t) * (1 - r * r) ** -0.5 * math.exp(-n * (simpson + head))


def xfm(x):
    """(x + 1)/(x - 1); an involution, so it maps r_n to z_n and back."""
    return (x + 1) / (x - 1)
