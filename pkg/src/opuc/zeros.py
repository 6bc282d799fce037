"""Zeros of polynomials, containment in the unit disk, and the quasi-energy
(T-function) whose stationary points are the zeros of phi_n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from ._io import write_csv
from .errors import CoincidentCharges, DomainError, NoConvergence, PoleOfA, ZeroLeadingCoefficient
from .fields import ExternalField
from .poly import ComplexPoly

__all__ = [
    "RootSet",
    "roots",
    "assert_in_disk",
    "reconstruction_error",
    "log_t_function",
    "t_function",
    "cj_log_t",
    "StationarityResult",
    "stationarity_residual",
    "cj_stationarity_residual",
    "sz_stationarity_residual",
    "ode_at_zeros_residual",
    "q_from_ode",
    "cj_constant_q",
    "roots_to_csv",
]

MAXITER = 200
STEP_TOL = 1e-14
ANGLE_OFFSET = 1e-3
DISK_MARGIN = 1e-10
COINCIDENT = 1e-12
A_FLOOR = 1e-300
CENTRAL_H = 1e-6
BACKWARD_TOL = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residuals: np.ndarray  # |p(z_j)| / sum_k |a_k| |z_j|^k
    iterations: int

    def __post_init__(self):
        self.roots.setflags(write=False)
        self.residuals.setflags(write=False)

    @property
    def n(self):
        return self.roots.size

    def reconstruct(self, leading):
        """leading * prod (z - z_j), coefficients low to high."""
        c = np.array([1.0 + 0j])
        for r in self.roots:
            c = np.concatenate(([0j], c)) - r * np.concatenate((c, [0j]))
        return ComplexPoly(leading * c)


def _arg_order(z):
    # deterministic order: argument, then modulus
    return np.lexsort((np.round(np.abs(z), 14), np.round(np.angle(z), 14)))


def _sort_by_arg(z):
    return z[_arg_order(z)]


def _backward_residual(c, z):
    p = kernels.horner(c, z)
    s = kernels.horner(np.abs(c).astype(np.complex128), np.abs(z).astype(np.complex128)).real
    return np.abs(p) / np.where(s > 0, s, 1.0)


def _polish(c, z, steps=2):
    z = z.copy()
    for _ in range(steps):
        p, dp, _ = kernels.horner_deriv(c, z)
        ok = dp != 0
        cand = np.where(ok, z - np.where(ok, p / np.where(ok, dp, 1), 0), z)
        better = np.abs(kernels.horner(c, cand)) < np.abs(p)
        z = np.where(better, cand, z)
    return z


def _start_points(c):
    """Aberth start points on circles read off the Newton polygon of log|a_k|.

    Each edge of the upper convex hull from k to m carries m - k points on the
    circle of radius |a_k/a_m|^{1/(m-k)}; roots of very different sizes then
    start near their own scale instead of all on one geometric-mean circle.
    """
    d = c.size - 1
    mag = np.abs(c)
    ks = [k for k in range(d + 1) if mag[k] > 0]
    logs = {k: np.log(mag[k]) for k in ks}
    hull = []
    for k in ks:
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j if it lies on or below the chord i -> k
            if (logs[j] - logs[i]) * (k - i) <= (logs[k] - logs[i]) * (j - i):
                hull.pop()
            else:
                break
        hull.append(k)
    pts = []
    for i, j in zip(hull[:-1], hull[1:]):
        m = j - i
        radius = np.exp((logs[i] - logs[j]) / m)
        ang = 2 * np.pi * np.arange(m) / m + ANGLE_OFFSET + 2 * np.pi * i / d
        pts.append(radius * np.exp(1j * ang))
    return np.concatenate(pts)


def roots(p: ComplexPoly) -> RootSet:
    """All zeros by Aberth-Ehrlich iteration followed by a Newton polish.

    Start points come from the Newton polygon of the coefficient moduli,
    rotated by a small fixed angle. Zero roots (vanishing low coefficients)
    are split off exactly.
    """
    if not isinstance(p, ComplexPoly):
        p = ComplexPoly(p)
    c = p.coeffs
    n = p.degree
    if n < 1:
        raise DomainError("root finding needs degree >= 1")
    if c[-1] == 0:
        raise ZeroLeadingCoefficient("leading coefficient is zero")
    m = int(np.argmax(c != 0))
    core = np.ascontiguousarray(c[m:])
    d = core.size - 1
    z = np.zeros(0, dtype=np.complex128)
    it = 0
    if d == 1:
        z = np.array([-core[0] / core[1]])
    elif d > 1:
        z0 = _start_points(core)
        z, it, ok = kernels.aberth(core, z0.astype(np.complex128), MAXITER, STEP_TOL)
        z = _polish(core, z)
        if not ok:
            # the step test can cycle at roundoff level; accept a backward-stable answer
            worst = float(np.max(_backward_residual(core, z)))
            if worst <= BACKWARD_TOL:
                ok = True
        if not ok:
            raise NoConvergence(f"Aberth iteration stalled after {MAXITER} iterations", worst)
    z = _sort_by_arg(np.concatenate((np.zeros(m, dtype=np.complex128), z)))
    return RootSet(z, _backward_residual(c, z), int(it))


def assert_in_disk(rs: RootSet, margin=DISK_MARGIN) -> bool:
    return bool(rs.n == 0 or np.max(np.abs(rs.roots)) < 1 - margin)


def reconstruction_error(p: ComplexPoly, rs: RootSet):
    """Coefficientwise relative error of leading * prod(z - z_j) against p."""
    r = rs.reconstruct(p.leading).coeffs
    return float(np.max(np.abs(r - p.coeffs)) / p.max_abs())


# --------------------------------------------------------------------------
# T-function
# --------------------------------------------------------------------------

def _check_charges(zs):
    zs = np.asarray(zs, dtype=np.complex128).ravel()
    if np.any(zs == 0):
        raise DomainError("charges at the origin: z^{-n+1} is singular")
    if zs.size > 1:
        diff = np.abs(zs[:, None] - zs[None, :])
        diff[np.diag_indices(zs.size)] = np.inf
        if diff.min() < COINCIDENT:
            raise CoincidentCharges(f"two charges closer than {COINCIDENT:g}")
    return zs


def _log_pairs(zs):
    s = 0j
    n = zs.size
    for j in range(n):
        for k in range(j + 1, n):
            s += 2 * np.log(zs[j] - zs[k])
    return s


def log_t_function(zs, field: ExternalField, A, n):
    """log T = sum_j [(1-n) log z_j - v(z_j) - log A_n(z_j)] + 2 sum_{j<k} log(z_j - z_k).

    -v is the analytic continuation of log w supplied by the field (it
    includes the normalisation of w, which only shifts log T by a constant).
    Principal branches throughout, so only exp(log T) is meaningful.
    """
    zs = _check_charges(zs)
    if field.log_weight is None:
        raise DomainError(f"field {field.name} has no continued log-weight")
    av = np.asarray(A(zs), dtype=np.complex128)
    if np.any(np.abs(av) < A_FLOOR):
        raise PoleOfA("A_n vanishes at a charge")
    one = (1 - n) * np.log(zs) + field.log_weight(zs) - np.log(av)
    return complex(np.sum(one[_arg_order(zs)])) + _log_pairs(_sort_by_arg(zs))


def t_function(zs, field: ExternalField, A, n):
    return complex(np.exp(log_t_function(zs, field, A, n)))


def cj_log_t(zs, a):
    """Circular Jacobi closed form: prod z^{1-n-a}(1-z)^{a+1}(z-1)^a prod (z_j - z_k)^2."""
    zs = _check_charges(zs)
    n = zs.size
    one = (1 - n - a) * np.log(zs) + (a + 1) * np.log(1 - zs) + a * np.log(zs - 1)
    return complex(np.sum(one[_arg_order(zs)])) + _log_pairs(_sort_by_arg(zs))


# --------------------------------------------------------------------------
# stationarity
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StationarityResult:
    residual: float  # max_j |gradient_j| / sum of |terms|
    pair_sum_residual: float  # direct pair sum vs f''/f' at the zeros


def _log_derivative(A, z):
    if hasattr(A, "derivative"):
        return A.derivative(z) / A(z)
    h = CENTRAL_H
    return (A(z + h) - A(z - h)) / (2 * h * A(z))


def _pair_sums(zs):
    d = zs[:, None] - zs[None, :]
    np.fill_diagonal(d, np.inf)
    return 2 * np.sum(1.0 / d, axis=1)


def _pair_sum_check(zs, pair):
    f = ComplexPoly(RootSet(zs.copy(), np.zeros(zs.size), 0).reconstruct(1.0).coeffs)
    d1 = f.derivative()
    ratio = d1.derivative()(zs) / d1(zs)
    return float(np.max(np.abs(ratio - pair) / np.maximum(np.abs(pair), 1.0)))


def stationarity_residual(zs, field: ExternalField, A, n) -> StationarityResult:
    """-v'(z_j) - A'/A(z_j) - (n-1)/z_j + 2 sum_{k != j} 1/(z_j - z_k), normalised."""
    zs = _check_charges(zs)
    pair = _pair_sums(zs)
    terms = [-field.vprime(zs), -_log_derivative(A, zs), -(n - 1) / zs, pair]
    res = np.abs(sum(terms)) / np.maximum(sum(np.abs(t) for t in terms), 1e-300)
    return StationarityResult(float(np.max(res)), _pair_sum_check(zs, pair))


def cj_stationarity_residual(zs, a) -> StationarityResult:
    zs = _check_charges(zs)
    n = zs.size
    pair = _pair_sums(zs)
    terms = [(1 - n - a) / zs, -(2 * a + 1) / (1 - zs), pair]
    res = np.abs(sum(terms)) / sum(np.abs(t) for t in terms)
    return StationarityResult(float(np.max(res)), _pair_sum_check(zs, pair))


def sz_stationarity_residual(zs, a, b) -> StationarityResult:
    """The Szego system; the last one-body term alternates with the parity of n."""
    zs = _check_charges(zs)
    n = zs.size
    pair = _pair_sums(zs)
    if n % 2:
        extra = -(a + b) / (a - b + (a + b) * zs)
    else:
        extra = -(a - b) / (a + b + (a - b) * zs)
    terms = [(1 - n - a - b) / zs, -(2 * a + 1) / (1 - zs), (2 * b + 1) / (1 + zs), extra, pair]
    res = np.abs(sum(terms)) / sum(np.abs(t) for t in terms)
    return StationarityResult(float(np.max(res)), _pair_sum_check(zs, pair))


def ode_at_zeros_residual(p: ComplexPoly, zs, P):
    """max_j |f''(z_j) + P(z_j) f'(z_j)| / max(|f''| + |P f'|, |f'|).

    The |f'| floor matters at n = 1, where f'' = 0 and P vanishes at the zero.
    """
    zs = np.asarray(zs, dtype=np.complex128)
    d1 = p.derivative()
    f1, f2 = d1(zs), d1.derivative()(zs)
    pf = P(zs) * f1
    den = np.maximum(np.abs(f2) + np.abs(pf), np.abs(f1))
    return float(np.max(np.abs(f2 + pf) / np.maximum(den, 1e-300)))


def q_from_ode(p: ComplexPoly, P, z):
    """Q(z) = -(f'' + P f')/f, at points away from the zeros."""
    z = np.asarray(z, dtype=np.complex128)
    d1 = p.derivative()
    return -(d1.derivative()(z) + P(z) * d1(z)) / p(z)


def cj_constant_q(p: ComplexPoly, a, n, z):
    """Q from z(1-z) f'' + [(1-n-a)(1-z) - (2a+1) z] f' + Q f = 0 at each sample.

    Returns (values, spread) with spread = max |Q - mean| / |mean|.
    """
    z = np.asarray(z, dtype=np.complex128)
    d1 = p.derivative()
    vals = -(z * (1 - z) * d1.derivative()(z)
             + ((1 - n - a) * (1 - z) - (2 * a + 1) * z) * d1(z)) / p(z)
    mean = np.mean(vals)
    spread = float(np.max(np.abs(vals - mean)) / max(abs(mean), 1e-300))
    return vals, spread


def roots_to_csv(rs: RootSet, path):
    rows = [(repr(float(z.real)), repr(float(z.imag)), repr(float(abs(z))), repr(float(r)))
            for z, r in zip(rs.roots, rs.residuals)]
    write_csv(path, ("re", "im", "abs", "residual"), rows)
