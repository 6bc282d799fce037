"""Ladder coefficients A_n, B_n from their integral representations, and the
identities built from them: lowering/raising relations, second-order
equations, functional equations and adjoints (classical and q-analogue).

Integrals use the dtheta measure of :mod:`opuc.moments`; the contour forms
``i * integral(... dzeta)`` become ``-integral(... zeta dtheta)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, QuadratureNotConverged
from .fields import ExternalField, QField
from .moments import QuadratureRule, quadrature_rule
from .poly import ComplexPoly, as_qreal
from .system import OPUCSystem

__all__ = [
    "LadderKind",
    "RationalFunction",
    "QuadratureFunction",
    "SampledFunction",
    "LadderPair",
    "NumericLadder",
    "QNumericLadder",
    "ladder_numeric",
    "q_ladder_numeric",
    "first_moment",
    "q_first_moment",
    "lowering_residual",
    "raising_residual",
    "q_lowering_residual",
    "q_raising_residual",
    "ode_coefficients",
    "ode_residual",
    "functional_equation_lhs",
    "functional_equation_residual",
    "abnew_constant",
    "q_functional_equation_residual",
    "q_fediff_residual",
    "q_limit_gap",
    "adjoint_residual",
    "q_adjoint_residual",
]

STENCIL_H = 1e-3


class LadderKind(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    QUADRATURE = "QuadratureIntegral"
    Q_QUADRATURE = "QQuadratureIntegral"


class RationalFunction:
    """num(z)/den(z) with an exact derivative."""

    def __init__(self, num, den=None):
        self.num = num if isinstance(num, ComplexPoly) else ComplexPoly(num)
        self.den = ComplexPoly([1.0]) if den is None else (
            den if isinstance(den, ComplexPoly) else ComplexPoly(den))

    @classmethod
    def constant(cls, c):
        return cls(ComplexPoly([c]))

    def __call__(self, z):
        return self.num(z) / self.den(z)

    def derivative(self, z):
        z = np.asarray(z, dtype=np.complex128)
        n, dn = self.num(z), self.num.derivative()(z)
        d, dd = self.den(z), self.den.derivative()(z)
        return (dn * d - n * dd) / (d * d)

    def __repr__(self):
        return f"RationalFunction({self.num!r}, {self.den!r})"


class QuadratureFunction:
    """A function evaluated on demand; derivative by a five-point stencil."""

    def __init__(self, fn: Callable, h=STENCIL_H):
        self._fn = fn
        self.h = h

    def __call__(self, z):
        return self._fn(np.asarray(z, dtype=np.complex128))

    def derivative(self, z):
        z = np.asarray(z, dtype=np.complex128)
        h = self.h
        f = self._fn
        return (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h)


class SampledFunction:
    """Values at a fixed set of points; evaluation elsewhere is refused."""

    def __init__(self, points, values):
        self.points = np.asarray(points, dtype=np.complex128).copy()
        self.values = np.asarray(values, dtype=np.complex128).copy()

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        if z.shape == self.points.shape and np.array_equal(z, self.points):
            return self.values.copy()
        raise DomainError("sampled function is only known at its sample points")

    def to_json(self):
        return {"points": [[p.real, p.imag] for p in self.points],
                "values": [[v.real, v.imag] for v in self.values]}


@dataclass(frozen=True)
class LadderPair:
    n: int
    A: object
    B: object
    kind: LadderKind = LadderKind.CLOSED_FORM

    @classmethod
    def zero(cls, n=0):
        c = RationalFunction.constant(0.0)
        return cls(n, c, c, LadderKind.CLOSED_FORM)

    def sampled(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return LadderPair(self.n, SampledFunction(z, self.A(z)), SampledFunction(z, self.B(z)), self.kind)


def _derivative(fn, z):
    if hasattr(fn, "derivative"):
        return fn.derivative(z)
    return QuadratureFunction(fn).derivative(z)


def _q_difference_of(fn, z, q):
    z = np.asarray(z, dtype=np.complex128)
    return (fn(z) - fn(q * z)) / ((1 - q) * z)


# --------------------------------------------------------------------------
# integral representations
# --------------------------------------------------------------------------

class NumericLadder:
    """A_n, B_n of the classical ladder by quadrature of their integrals."""

    def __init__(self, sys: OPUCSystem, field: ExternalField, n, rule: QuadratureRule):
        if not (0 <= n <= sys.N):
            raise IndexError(f"degree {n} outside 0..{sys.N}")
        self.sys, self.field, self.n, self.rule = sys, field, n, rule
        if n == 0:
            return
        sys.require_nonzero_phi0(n)
        zeta, wts = rule.nodes, rule.weights
        phi = sys.phi[n](zeta)
        phis = sys.phistar[n](zeta)
        ratio = sys.kappa[n] / sys.phi0[n]
        self._gA = phi * np.conj(phis) * zeta * wts
        self._gB = phi * (np.conj(phi) - ratio * np.conj(phis)) * zeta * wts

    def _kernel(self, z):
        return self.field.divided_difference(z[..., None], self.rule.nodes)

    def A(self, z):
        z = np.asarray(z, dtype=np.complex128)
        n, s = self.n, self.sys
        if n == 0:
            return np.zeros(z.shape, dtype=np.complex128)
        integral = np.sum(self._kernel(z) * self._gA, axis=-1)
        return n * s.kappa[n - 1] / s.kappa[n] - (s.kappa[n - 1] / s.phi0[n]) * z * integral

    def B(self, z):
        z = np.asarray(z, dtype=np.complex128)
        if self.n == 0:
            return np.zeros(z.shape, dtype=np.complex128)
        return np.sum(self._kernel(z) * self._gB, axis=-1)

    def pair(self):
        return LadderPair(self.n, QuadratureFunction(self.A), QuadratureFunction(self.B),
                          LadderKind.QUADRATURE)


class QNumericLadder:
    """A_n, B_n of the q-ladder by quadrature, with conj(p(q zeta)) on |zeta| = 1."""

    def __init__(self, sys: OPUCSystem, qfield: QField, n, rule: QuadratureRule):
        if not (0 <= n <= sys.N):
            raise IndexError(f"degree {n} outside 0..{sys.N}")
        self.sys, self.qfield, self.n, self.rule = sys, qfield, n, rule
        self.q = qfield.q
        if n == 0:
            return
        sys.require_nonzero_phi0(n)
        q = self.q
        zeta, wts = rule.nodes, rule.weights
        phi = sys.phi[n](zeta)
        phi_q = sys.phi[n](q * zeta)
        phis_q = sys.phistar[n](q * zeta)
        ratio = sys.kappa[n] / sys.phi0[n]
        self._gA = phi * np.conj(phis_q) * zeta * wts
        self._gB = phi * (np.conj(phi_q) - ratio * np.conj(phis_q)) * zeta * wts

    def _kernel(self, z):
        return self.qfield.q_divided_difference(z[..., None], self.rule.nodes)

    def A(self, z):
        z = np.asarray(z, dtype=np.complex128)
        n, s, q = self.n, self.sys, self.q
        if n == 0:
            return np.zeros(z.shape, dtype=np.complex128)
        qn = float(np.sum(q ** np.arange(n)))  # [n]_q
        integral = np.sum(self._kernel(z) * self._gA, axis=-1)
        return s.kappa[n - 1] / s.kappa[n] * qn - (s.kappa[n - 1] / s.phi0[n]) * z * integral

    def B(self, z):
        z = np.asarray(z, dtype=np.complex128)
        if self.n == 0:
            return np.zeros(z.shape, dtype=np.complex128)
        return np.sum(self._kernel(z) * self._gB, axis=-1)

    def pair(self):
        return LadderPair(self.n, QuadratureFunction(self.A), QuadratureFunction(self.B),
                          LadderKind.Q_QUADRATURE)


def _rule_for(sys, M):
    if sys.weight is None:
        raise DomainError("the system carries no weight; quadrature needs one")
    return quadrature_rule(sys.weight, M, sys.N)


def ladder_numeric(sys, field, n, z_samples=None, M=None, check=True, tol=1e-9):
    """Classical ladder pair from the integral formulas.

    With ``check`` the integrals are recomputed on a doubled grid and
    :class:`QuadratureNotConverged` is raised if they move by more than ``tol``.
    Returns a :class:`LadderPair` callable anywhere, or sampled when
    ``z_samples`` is given.
    """
    rule = _rule_for(sys, M)
    lad = NumericLadder(sys, field, n, rule)
    pair = lad.pair()
    if check and n > 0:
        z = _probe_points(z_samples)
        lad2 = NumericLadder(sys, field, n, _rule_for(sys, 2 * rule.M))
        _assert_converged(lad, lad2, z, tol, _conditioning(sys, n))
    return pair.sampled(z_samples) if z_samples is not None else pair


def q_ladder_numeric(sys, qfield, n, z_samples=None, M=None, check=True, tol=1e-9):
    rule = _rule_for(sys, M)
    lad = QNumericLadder(sys, qfield, n, rule)
    pair = lad.pair()
    if check and n > 0:
        z = _probe_points(z_samples)
        lad2 = QNumericLadder(sys, qfield, n, _rule_for(sys, 2 * rule.M))
        _assert_converged(lad, lad2, z, tol, _conditioning(sys, n))
    return pair.sampled(z_samples) if z_samples is not None else pair


def _probe_points(z_samples):
    if z_samples is not None:
        return np.asarray(z_samples, dtype=np.complex128)
    return 0.5 * np.exp(2j * np.pi * (np.arange(8) + 0.25) / 8)


def _conditioning(sys, n):
    # the integrals are divided by phi_n(0), so rounding is amplified by kappa_n/|phi_n(0)|
    p0 = abs(complex(sys.phi0[n]))
    return float(sys.kappa[n]) / p0 if p0 > 0 else np.inf


def _assert_converged(l1, l2, z, tol, cond=1.0):
    a1, a2 = l1.A(z), l2.A(z)
    b1, b2 = l1.B(z), l2.B(z)
    scale = max(1.0, float(np.max(np.abs(a1))), float(np.max(np.abs(b1))))
    drift = max(float(np.max(np.abs(a1 - a2))), float(np.max(np.abs(b1 - b2)))) / scale
    floor = 64 * np.finfo(float).eps * max(1.0, cond)
    if drift > max(tol, floor):
        raise QuadratureNotConverged(f"ladder integrals move by {drift:.3e} when the grid doubles")


def first_moment(field: ExternalField, rule: QuadratureRule, z):
    """M_1(z) = integral of zeta (v'(z) - v'(zeta))/(z - zeta) w dtheta."""
    z = np.asarray(z, dtype=np.complex128)
    K = field.divided_difference(z[..., None], rule.nodes)
    return np.sum(K * rule.nodes * rule.weights, axis=-1)


def q_first_moment(qfield: QField, rule: QuadratureRule, z):
    z = np.asarray(z, dtype=np.complex128)
    K = qfield.q_divided_difference(z[..., None], rule.nodes)
    return np.sum(K * rule.nodes * rule.weights, axis=-1)


# --------------------------------------------------------------------------
# residuals
# --------------------------------------------------------------------------

def _rel(res, *terms):
    scale = max(float(np.max(np.abs(t))) for t in terms)
    res = float(np.max(np.abs(res)))
    return res / scale if scale > 0 else res


def lowering_residual(sys, pair: LadderPair, n, z_samples):
    """phi_n' - A_n phi_{n-1} + B_n phi_n, relative to the largest term."""
    z = np.asarray(z_samples, dtype=np.complex128)
    dphi = sys.phi[n].derivative()(z)
    t1 = pair.A(z) * sys.phi[n - 1](z)
    t2 = pair.B(z) * sys.phi[n](z)
    return _rel(dphi - t1 + t2, dphi, t1, t2)


def q_lowering_residual(sys, pair: LadderPair, n, q, z_samples):
    q = as_qreal(q).q
    z = np.asarray(z_samples, dtype=np.complex128)
    dq = sys.phi[n].q_difference(q)(z)
    t1 = pair.A(z) * sys.phi[n - 1](z)
    t2 = pair.B(z) * sys.phi[n](z)
    return _rel(dq - t1 + t2, dq, t1, t2)


def _raising_parts(sys, pair_nm1, n, z, dphi_nm1):
    if n < 2:
        raise DomainError("the raising operator involves kappa_{n-2}; need n >= 2")
    sys.require_nonzero_phi0(n)
    k = sys.kappa
    A = pair_nm1.A(z)
    B = pair_nm1.B(z)
    p = sys.phi[n - 1](z)
    c1 = k[n - 1] / k[n - 2]
    c2 = k[n] * sys.phi0[n - 1] / (k[n - 2] * sys.phi0[n])
    terms = [-dphi_nm1, -B * p, A * c1 / z * p, A * c2 * p]
    rhs = A / z * (sys.phi0[n - 1] * k[n - 1] / (sys.phi0[n] * k[n - 2])) * sys.phi[n](z)
    return terms, rhs


def raising_residual(sys, pair_nm1: LadderPair, n, z_samples):
    """L_{n,2} phi_{n-1} against its image, a multiple of phi_n."""
    z = np.asarray(z_samples, dtype=np.complex128)
    terms, rhs = _raising_parts(sys, pair_nm1, n, z, sys.phi[n - 1].derivative()(z))
    return _rel(sum(terms) - rhs, *terms, rhs)


def q_raising_residual(sys, pair_nm1: LadderPair, n, q, z_samples):
    q = as_qreal(q).q
    z = np.asarray(z_samples, dtype=np.complex128)
    terms, rhs = _raising_parts(sys, pair_nm1, n, z, sys.phi[n - 1].q_difference(q)(z))
    return _rel(sum(terms) - rhs, *terms, rhs)


def ode_coefficients(sys, pairs, n, z_samples, form="first"):
    """P and Q of phi_n'' + P phi_n' + Q phi_n = 0 at the sample points.

    ``form="first"`` eliminates with pairs n and n-1, ``form="second"`` with
    pairs n and n+1 (the opposite elimination order).
    """
    z = np.asarray(z_samples, dtype=np.complex128)
    k, p0 = sys.kappa, sys.phi0
    An, Bn = pairs[n].A(z), pairs[n].B(z)
    dAn, dBn = _derivative(pairs[n].A, z), _derivative(pairs[n].B, z)
    la = dAn / An
    if form == "first":
        if n < 2:
            raise DomainError("the first form needs n >= 2")
        sys.require_nonzero_phi0(n)
        Am, Bm = pairs[n - 1].A(z), pairs[n - 1].B(z)
        c1 = k[n - 1] / k[n - 2]
        c2 = k[n] / k[n - 2] * p0[n - 1] / p0[n]
        c3 = k[n - 1] / k[n - 2] * p0[n - 1] / p0[n]
        P = Bn + Bm - la - c1 * Am / z - c2 * Am
        Q = dBn - Bn * la + Bn * Bm - c1 * Am * Bn / z - c2 * Am * Bn + c3 * Am * An / z
        return P, Q
    if form == "second":
        if n < 1 or n + 1 > sys.N:
            raise DomainError("the second form needs 1 <= n <= N-1")
        sys.require_nonzero_phi0(n + 1)
        Ap, Bp = pairs[n + 1].A(z), pairs[n + 1].B(z)
        c1 = k[n] / k[n - 1]
        c2 = k[n + 1] / k[n - 1] * p0[n] / p0[n + 1]
        c3 = k[n] / k[n - 1] * p0[n] / p0[n + 1]
        P = Bp + Bn - la - c1 * An / z - c2 * An + 1 / z
        Q = (dBn - Bn * la + Bp * Bn - c1 * An * Bp / z - c2 * An * Bp
             + c3 * An * Ap / z + Bn / z - c2 * An / z)
        return P, Q
    raise ValueError(f"unknown form {form!r}")


def ode_residual(sys, n, P, Q, z_samples):
    z = np.asarray(z_samples, dtype=np.complex128)
    f, df, d2f = sys.phi[n].eval_with_derivatives(z)
    return _rel(d2f + P * df + Q * f, d2f, P * df, Q * f)


def functional_equation_lhs(sys, pairs, n, z):
    """B_n + B_{n-1} - (k_{n-1}/k_{n-2}) A_{n-1}/z - (k_n/k_{n-2})(phi_{n-1}(0)/phi_n(0)) A_{n-1}."""
    if n < 2:
        raise DomainError("the functional equation is stated for n >= 2")
    sys.require_nonzero_phi0(n, n - 1)
    z = np.asarray(z, dtype=np.complex128)
    k, p0 = sys.kappa, sys.phi0
    Am = pairs[n - 1].A(z)
    terms = [pairs[n].B(z), pairs[n - 1].B(z), -k[n - 1] / k[n - 2] * Am / z,
             -k[n] / k[n - 2] * p0[n - 1] / p0[n] * Am]
    return sum(terms), terms


def functional_equation_residual(sys, pairs, field, n, z_samples):
    z = np.asarray(z_samples, dtype=np.complex128)
    lhs, terms = functional_equation_lhs(sys, pairs, n, z)
    rhs = -(n - 1) / z - field.vprime(z)
    return _rel(lhs - rhs, *terms, rhs)


def abnew_constant(sys, field, z_samples, M=None):
    """The n = 1 value of the functional-equation left side plus (n-1)/z.

    With B_0 = 0 and A_0/kappa_{-1} read as -z M_1(z) this is
    B_1 + M_1 + z kappa_1 M_1/phi_1(0); it should equal -v'(z).
    """
    z = np.asarray(z_samples, dtype=np.complex128)
    sys.require_nonzero_phi0(1)
    rule = _rule_for(sys, M)
    B1 = NumericLadder(sys, field, 1, rule).B(z)
    M1 = first_moment(field, rule, z)
    return B1 + sys.kappa[0] * M1 + z * sys.kappa[1] * sys.kappa[0] * M1 / sys.phi0[1]


def _q_sum_terms(sys, qpairs, n, z, M1):
    """Terms j = 0..n-1 of sum [B_{j+1} - (k_j/k_{j-1}) A_j/z], with A_0/k_{-1} = -z M_1."""
    k = sys.kappa
    out = [qpairs[1].B(z) + k[0] * M1]
    for j in range(1, n):
        out.append(qpairs[j + 1].B(z) - k[j] / k[j - 1] * qpairs[j].A(z) / z)
    return out


def q_functional_equation_residual(sys, qpairs, qfield, n, z_samples, M=None):
    q = qfield.q
    z = np.asarray(z_samples, dtype=np.complex128)
    lhs, terms = functional_equation_lhs(sys, qpairs, n, z)
    M1 = q_first_moment(qfield, _rule_for(sys, M), z)
    sums = _q_sum_terms(sys, qpairs, n, z, M1)
    rhs_terms = [-(n - 1) / (q * z), -qfield.u(q * z) / q, -(1 - q) / q * sum(sums)]
    return _rel(lhs - sum(rhs_terms), *terms, *rhs_terms)


def q_fediff_residual(sys, qpairs, qfield, n, z_samples, M=None):
    """Unsummed difference equation linking indices n-1, n, n+1 (n >= 1)."""
    q = qfield.q
    z = np.asarray(z_samples, dtype=np.complex128)
    k, p0 = sys.kappa, sys.phi0
    sys.require_nonzero_phi0(n, n + 1)
    An, Bp = qpairs[n].A(z), qpairs[n + 1].B(z)
    terms = [Bp / q, -k[n] / k[n - 1] * An / (q * z),
             -k[n + 1] / k[n - 1] * p0[n] / p0[n + 1] * An]
    if n >= 2:
        Am = qpairs[n - 1].A(z)
        terms += [-qpairs[n - 1].B(z), k[n - 1] / k[n - 2] * Am / z,
                  k[n] / k[n - 2] * p0[n - 1] / p0[n] * Am]
    else:
        # B_0 = 0 and A_0/kappa_{-1} = -z M_1
        zM1 = z * q_first_moment(qfield, _rule_for(sys, M), z)
        terms += [-k[0] * zM1 / z, -k[1] * p0[0] / p0[1] * zM1]
    rhs = -1.0 / (q * z)
    return _rel(sum(terms) - rhs, *terms, rhs)


def q_limit_gap(sys, classical_pairs, qfield, n_max, z_samples, M=4096):
    """How far the q-identities sit from the classical ones for q near 1.

    Returns (fe, ladder): the largest q-functional-equation residual when the
    classical pairs are substituted, 2 <= n <= n_max, and the largest relative
    gap between quadrature q-ladder and classical A_n, 1 <= n <= n_max.
    Both are O(1 - q).
    """
    z = np.asarray(z_samples, dtype=np.complex128)
    fe = max(q_functional_equation_residual(sys, classical_pairs, qfield, n, z, M)
             for n in range(2, n_max + 1))
    gap = 0.0
    for n in range(1, n_max + 1):
        qp = q_ladder_numeric(sys, qfield, n, M=M, check=False)
        ca = classical_pairs[n].A(z)
        gap = max(gap, float(np.max(np.abs(qp.A(z) - ca)) / np.max(np.abs(ca))))
    return fe, gap


# --------------------------------------------------------------------------
# adjoints
# --------------------------------------------------------------------------

def _ip(rule, fv, gv):
    return complex(np.sum(rule.weights * fv * np.conj(gv)))


def adjoint_residual(sys, pair, field, n, f: ComplexPoly, g: ComplexPoly, M=None, printed=False):
    """|(L f, g) - (f, L* g)| / (|f| |g|) for L = d/dz + B_n.

    L* g = z^2 g' + z g + conj(v' + B_n) g on |z| = 1. With ``printed`` the
    multiplier uses conj(v + B_n) instead, for comparison.
    """
    rule = _rule_for(sys, M)
    zeta = rule.nodes
    B = pair.B(zeta)
    fv, gv = f(zeta), g(zeta)
    Lf = f.derivative()(zeta) + B * fv
    if printed:
        mult = -field.log_weight(zeta) + B
    else:
        mult = field.vprime(zeta) + B
    Lsg = zeta**2 * g.derivative()(zeta) + zeta * gv + np.conj(mult) * gv
    lhs, rhs = _ip(rule, Lf, gv), _ip(rule, fv, Lsg)
    norm = np.sqrt(_ip(rule, fv, fv).real * _ip(rule, gv, gv).real)
    return abs(lhs - rhs) / norm


def q_adjoint_residual(sys, pair, qfield, n, f: ComplexPoly, g: ComplexPoly, M=None, printed=False):
    """Adjoint of L = D_q + B_n on |z| = 1.

    L* g = z^2 [q - (1-q) conj(z u(z))] D_q g + z g + conj(B_n + u) g.
    With ``printed`` the bracket uses z conj(u(z)) in place of conj(z u(z)).
    """
    q = qfield.q
    rule = _rule_for(sys, M)
    zeta = rule.nodes
    B = pair.B(zeta)
    u = qfield.u(zeta)
    fv, gv = f(zeta), g(zeta)
    Lf = f.q_difference(q)(zeta) + B * fv
    zu = zeta * np.conj(u) if printed else np.conj(zeta * u)
    Lsg = zeta**2 * (q - (1 - q) * zu) * g.q_difference(q)(zeta) + zeta * gv + np.conj(B + u) * gv
    lhs, rhs = _ip(rule, Lf, gv), _ip(rule, fv, Lsg)
    norm = np.sqrt(_ip(rule, fv, fv).real * _ip(rule, gv, gv).real)
    return abs(lhs - rhs) / norm

