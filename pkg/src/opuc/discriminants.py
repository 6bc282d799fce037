"""Discriminants: classical, q-deformed and generalized (resultant against a
degree-reducing operator), each by root products and by closed forms built
from kappa_n and phi_n(0).

Values are carried as (log|D|, unit phase) so that products of many kappas
or q-Pochhammer symbols never overflow. Products over roots run in
sorted-by-argument order.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._io import write_csv
from .errors import DomainError, NoLadderForOperator
from .moments import Family
from .poly import ComplexPoly, as_qreal
from .special import pochhammer, q_pochhammer
from .system import OPUCSystem
from .zeros import roots

__all__ = [
    "Method",
    "DiscriminantResult",
    "log_value",
    "discriminant",
    "resultant_discriminant",
    "sylvester_discriminant",
    "q_discriminant",
    "q_discriminant_alt",
    "delta",
    "delta_brute",
    "delta_closed",
    "cj_delta",
    "sz_delta",
    "Derivative",
    "QDifference",
    "generalized_discriminant",
    "rs_disc",
    "rs_disc2",
    "rs_disc3",
    "QLimitResult",
    "rs_disc_q_limit",
    "DISC_TABLE_HEADER",
    "disc_table_rows",
    "write_disc_table",
]

EXP_LIMIT = 300.0


class Method(str, enum.Enum):
    ROOT_PRODUCT = "RootProduct"
    RESULTANT = "Resultant"
    SYLVESTER = "Sylvester"
    CLOSED_FORM = "ClosedForm"
    SCHUR_LEMMA = "SchurLemma"


@dataclass(frozen=True)
class DiscriminantResult:
    log_abs: float
    phase: complex  # unit modulus, or 0 for an exact zero
    method: Method
    n: int
    params: dict = field(default_factory=dict)

    @property
    def is_zero(self):
        return self.phase == 0

    @property
    def value(self) -> complex:
        if self.is_zero:
            return 0j
        if abs(self.log_abs) > EXP_LIMIT:
            raise OverflowError(f"|D| = exp({self.log_abs:.1f}) is outside the exponentiable range")
        return math.exp(self.log_abs) * self.phase

    def rel_diff(self, other: "DiscriminantResult") -> float:
        """|D_self / D_other - 1|, computed from the logs."""
        if self.is_zero or other.is_zero:
            return 0.0 if self.is_zero and other.is_zero else math.inf
        d = complex(self.log_abs - other.log_abs, cmath.phase(self.phase / other.phase))
        return abs(cmath.exp(d) - 1)

    def to_row(self):
        return [self.log_abs, self.phase.real, self.phase.imag]


def _result(log_abs, phase, method, n, params=None):
    return DiscriminantResult(float(log_abs), complex(phase), method, int(n), dict(params or {}))


def log_value(x) -> tuple:
    """(log|x|, x/|x|); (-inf, 0) for x == 0."""
    x = complex(x)
    a = abs(x)
    if a == 0:
        return -math.inf, 0j
    return math.log(a), x / a


def _log_product(values):
    """Sum of logs and product of phases, in the given order."""
    la = 0.0
    ph = 1 + 0j
    for v in values:
        l, p = log_value(v)
        if p == 0:
            return -math.inf, 0j
        la += l
        ph *= p
        ph /= abs(ph)
    return la, ph


def _pair_values(z, fn):
    n = z.size
    return [fn(z[j], z[k]) for j in range(n) for k in range(j + 1, n)]


def _times(lp, la, ph=1 + 0j):
    return lp[0] + la, lp[1] * ph


def _sign_power(m):
    return -1.0 if m % 2 else 1.0


# --------------------------------------------------------------------------
# classical discriminant
# --------------------------------------------------------------------------

def _need_degree(p: ComplexPoly, lo=2):
    if not isinstance(p, ComplexPoly):
        p = ComplexPoly(p)
    if p.degree < lo:
        raise DomainError(f"discriminant needs degree >= {lo}")
    if p.leading == 0:
        raise DomainError("leading coefficient is zero")
    return p


def discriminant(p: ComplexPoly, z=None) -> DiscriminantResult:
    """gamma^{2n-2} prod_{j<k} (z_j - z_k)^2 from the roots."""
    p = _need_degree(p)
    n = p.degree
    z = roots(p).roots if z is None else np.asarray(z)
    lp = _log_product(_pair_values(z, lambda a, b: (a - b) ** 2))
    lg, pg = log_value(p.leading)
    la, ph = _times(lp, (2 * n - 2) * lg, pg ** (2 * n - 2))
    return _result(la, ph, Method.ROOT_PRODUCT, n)


def resultant_discriminant(p: ComplexPoly, z=None) -> DiscriminantResult:
    """(-1)^{n(n-1)/2} gamma^{-1} R{f, f'} with R{f, g} = gamma^m prod g(z_j)."""
    p = _need_degree(p)
    n = p.degree
    z = roots(p).roots if z is None else np.asarray(z)
    d = p.derivative()
    lp = _log_product(d(z))
    lg, pg = log_value(p.leading)
    la, ph = _times(lp, (n - 2) * lg, pg ** (n - 2) * _sign_power(n * (n - 1) // 2))
    return _result(la, ph, Method.RESULTANT, n)


def sylvester_discriminant(p: ComplexPoly) -> DiscriminantResult:
    """Determinant of the Sylvester matrix of f and f'; small degrees only."""
    p = _need_degree(p)
    n = p.degree
    if n > 6:
        raise DomainError("the Sylvester cross-check is limited to degree <= 6")
    f = p.coeffs[::-1]
    g = p.derivative().coeffs[::-1]
    m = n - 1
    S = np.zeros((n + m, n + m), dtype=np.complex128)
    for i in range(m):
        S[i, i:i + n + 1] = f
    for i in range(n):
        S[m + i, i:i + m + 1] = g
    sign, logdet = np.linalg.slogdet(S)
    lg, pg = log_value(p.leading)
    la = logdet - lg
    ph = sign / pg * _sign_power(n * (n - 1) // 2)
    return _result(la, ph, Method.SYLVESTER, n)


# --------------------------------------------------------------------------
# q-discriminant
# --------------------------------------------------------------------------

def _q_prefactor(p, q, n):
    lg, pg = log_value(p.leading)
    return (2 * n - 2) * lg + n * (n - 1) / 2 * math.log(q), pg ** (2 * n - 2)


def q_discriminant(p: ComplexPoly, q, z=None) -> DiscriminantResult:
    """gamma^{2n-2} q^{n(n-1)/2} prod_{j<k} (q^{1/2} z_j - q^{-1/2} z_k)(q^{-1/2} z_j - q^{1/2} z_k)."""
    p = _need_degree(p)
    q = as_qreal(q)
    s = q.sqrt_q
    n = p.degree
    z = roots(p).roots if z is None else np.asarray(z)
    lp = _log_product(_pair_values(z, lambda a, b: (s * a - b / s) * (a / s - s * b)))
    la, ph = _times(lp, *_q_prefactor(p, q.q, n))
    return _result(la, ph, Method.ROOT_PRODUCT, n, {"q": q.q})


def q_discriminant_alt(p: ComplexPoly, q, z=None) -> DiscriminantResult:
    """Same quantity from the symmetric pair factor z_j^2 + z_k^2 - (q + 1/q) z_j z_k."""
    p = _need_degree(p)
    q = as_qreal(q)
    n = p.degree
    qq = q.q
    z = roots(p).roots if z is None else np.asarray(z)
    lp = _log_product(_pair_values(z, lambda a, b: a * a + b * b - (qq + 1 / qq) * a * b))
    la, ph = _times(lp, *_q_prefactor(p, qq, n))
    return _result(la, ph, Method.ROOT_PRODUCT, n, {"q": qq, "form": "symmetric"})


# --------------------------------------------------------------------------
# Delta_n = prod phi_{n-1}(z_{j,n})
# --------------------------------------------------------------------------

def _params(sys):
    return dict(sys.meta) if sys.meta else {}


def delta_brute(sys: OPUCSystem, n) -> DiscriminantResult:
    if n < 1 or n > sys.N:
        raise DomainError(f"n must lie in 1..{sys.N}")
    z = roots(sys.phi[n]).roots
    la, ph = _log_product(sys.phi[n - 1](z))
    return _result(la, ph, Method.ROOT_PRODUCT, n, _params(sys))


def _log_kappa_block(sys, n):
    """log of prod_{j=1}^{n-1} kappa_j^2 / (kappa_n^{n-1} kappa_{n-1}^n)."""
    lk = np.log(sys.kappa)
    return 2 * float(np.sum(lk[1:n])) - (n - 1) * lk[n] - n * lk[n - 1]


def delta_closed(sys: OPUCSystem, n) -> DiscriminantResult:
    """Closed form [phi_n(0)]^{n-1} prod_{j<n} kappa_j^2 / (kappa_n^{n-1} kappa_{n-1}^n)."""
    if n < 1 or n > sys.N:
        raise DomainError(f"n must lie in 1..{sys.N}")
    if n == 1:
        return _result(0.0, 1.0, Method.SCHUR_LEMMA, 1, _params(sys))
    # the derivation runs the three-term recurrence through every lower degree
    sys.require_nonzero_phi0(*range(1, n + 1))
    l0, p0 = log_value(sys.phi0[n])
    la = (n - 1) * l0 + _log_kappa_block(sys, n)
    return _result(la, p0 ** (n - 1), Method.SCHUR_LEMMA, n, _params(sys))


def delta(sys: OPUCSystem, n):
    return delta_brute(sys, n), delta_closed(sys, n)


def cj_delta(a, n) -> DiscriminantResult:
    """Circular Jacobi family formula for Delta_n."""
    a = float(a)
    if n < 1:
        raise DomainError("n >= 1")
    if n == 1:
        return _result(0.0, 1.0, Method.CLOSED_FORM, 1, {"family": "cj", "a": a})
    lp = lambda x, k: math.log(pochhammer(x, k))  # noqa: E731
    la = (n - 1) * math.log(a / (n + a))
    la += n / 2 * (math.lgamma(n) + lp(2 * a + 1, n - 1) - 2 * lp(a + 1, n - 1))
    for j in range(1, n):
        la += 2 * lp(a + 1, j) - math.lgamma(j + 1) - lp(2 * a + 1, j)
    return _result(la, 1.0, Method.CLOSED_FORM, n, {"family": "cj", "a": a})


def sz_delta(a, b, m) -> DiscriminantResult:
    """Szego family formula for Delta_m, even and odd m separately."""
    a, b = float(a), float(b)
    params = {"family": "sz", "a": a, "b": b}
    if m < 1:
        raise DomainError("m >= 1")
    if m == 1:
        return _result(0.0, 1.0, Method.CLOSED_FORM, 1, params)
    lp = lambda x, k: math.log(pochhammer(x, k))  # noqa: E731
    lf = lambda k: math.lgamma(k + 1)  # noqa: E731
    s = a + b + 1
    n = (m + 1) // 2
    tail = sum(lf(l) + lp(s, l) + lp(a + 0.5, l) + lp(b + 0.5, l) for l in range(1, n))
    if m % 2 == 0:
        base, sgn = log_value((a + b) / (2 * n + a + b))
        la = (2 * n - 1) * base
        la += n * (lf(n - 1) + lp(s, n - 1) + lp(a + 0.5, n) + lp(b + 0.5, n) - 2 * lp(s, 2 * n - 1))
        la -= lp(a + 0.5, n) + lp(b + 0.5, n)
        la += 2 * (sum(lp(s, j) for j in range(1, 2 * n)) - tail)
        ph = sgn ** (2 * n - 1)
    else:
        base, sgn = log_value((a - b) / (2 * n - 1 + a + b))
        if sgn == 0:
            return _result(-math.inf, 0j, Method.CLOSED_FORM, m, params)
        la = (2 * n - 2) * base
        la += (n - 0.5) * (lf(n - 1) + lp(s, n - 1) + lp(a + 0.5, n - 1) + lp(b + 0.5, n - 1)
                           - 2 * lp(s, 2 * n - 2))
        la += lf(n - 1) + lp(s, n - 1)
        la += 2 * (sum(lp(s, j) for j in range(1, 2 * n - 1)) - tail)
        ph = sgn ** (2 * n - 2)
    return _result(la, ph, Method.CLOSED_FORM, m, params)


# --------------------------------------------------------------------------
# generalized discriminant D(f, T) = (-1)^{n(n-1)/2} gamma^{n-2} prod (T f)(z_j)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Derivative:
    def apply(self, p: ComplexPoly) -> ComplexPoly:
        return p.derivative()

    @property
    def tag(self):
        return "d/dz"


@dataclass(frozen=True)
class QDifference:
    q: float

    def apply(self, p: ComplexPoly) -> ComplexPoly:
        return p.q_difference(self.q)

    @property
    def tag(self):
        return f"D_q(q={self.q:g})"


def _default_pair(sys, n, T):
    from .families import closed_ladder, rs_ladder

    fam = getattr(sys.weight, "family", None)
    if isinstance(T, Derivative):
        if fam in (Family.CIRCULAR_JACOBI, Family.SZEGO, Family.MODIFIED_BESSEL):
            return closed_ladder(sys, n)
    elif isinstance(T, QDifference):
        if fam is Family.ROGERS_SZEGO and abs(sys.weight.q - T.q) < 1e-15:
            return rs_ladder(T.q, n)
    raise NoLadderForOperator(f"no ladder pair for {T.tag} on this system")


def generalized_discriminant(sys: OPUCSystem, n, T, pair=None):
    """(brute, closed) for D(phi_n, T).

    brute: (-1)^{n(n-1)/2} kappa_n^{n-2} prod (T phi_n)(z_j) over the zeros.
    closed: (-1)^{n(n-1)/2} [phi_n(0)]^{n-1} prod_{j<n} kappa_j^2 /
    (kappa_n kappa_{n-1}^n) prod A_n(z_j), for T phi_n = A_n phi_{n-1} - B_n phi_n.
    """
    if n < 1 or n > sys.N:
        raise DomainError(f"n must lie in 1..{sys.N}")
    pair = _default_pair(sys, n, T) if pair is None else pair
    params = {**_params(sys), "T": T.tag}
    phi = sys.phi[n]
    z = roots(phi).roots
    sgn = _sign_power(n * (n - 1) // 2)
    lk = math.log(sys.kappa[n])
    lb, pb = _log_product(T.apply(phi)(z))
    brute = _result(lb + (n - 2) * lk, pb * sgn, Method.ROOT_PRODUCT, n, params)
    if n > 1:
        sys.require_nonzero_phi0(*range(1, n + 1))
    la, pa = _log_product(pair.A(z))
    l0, p0 = log_value(sys.phi0[n]) if n > 1 else (0.0, 1 + 0j)
    lc = (n - 1) * l0 + _log_kappa_block(sys, n) + (n - 2) * lk + la
    closed = _result(lc, sgn * p0 ** (n - 1) * pa, Method.SCHUR_LEMMA, n, params)
    return brute, closed


# --------------------------------------------------------------------------
# Rogers-Szego closed forms
# --------------------------------------------------------------------------

def _lqp(q, k):
    return math.log(q_pochhammer(q, q, k))


def rs_disc(q, n) -> DiscriminantResult:
    """D(phi_n, D_q) = (-q)^{n(n-1)/2} (1-q)^{-n} (q;q)_n prod_{j<n} 1/(q;q)_j."""
    q = as_qreal(q).q
    m = n * (n - 1) // 2
    la = m * math.log(q) - n * math.log1p(-q) + _lqp(q, n) - sum(_lqp(q, j) for j in range(1, n))
    return _result(la, _sign_power(m), Method.CLOSED_FORM, n, {"family": "rs", "q": q})


def rs_disc2(q, n) -> DiscriminantResult:
    """D(H_n, q) = (-q)^{-n(n-1)/2} [(q;q)_n/(1-q)]^n prod_{j<n} 1/(q;q)_j."""
    q = as_qreal(q).q
    m = n * (n - 1) // 2
    la = -m * math.log(q) + n * (_lqp(q, n) - math.log1p(-q)) - sum(_lqp(q, j) for j in range(1, n))
    return _result(la, _sign_power(m), Method.CLOSED_FORM, n, {"family": "rs-H", "q": q})


def rs_disc3(q, n, printed=False) -> DiscriminantResult:
    """The H_n discriminant rearranged so the (1-q)^{n(n-1)/2} decay is explicit.

    (-q)^{-n(n-1)/2} (1-q)^{n(n-1)/2} [(q;q)_n/(1-q)^n]^{n+1} prod_{j=1}^n (1-q)^j/(q;q)_j.
    With ``printed`` the variant with (-q)^{+n(n-1)/2} and exponent n on the
    bracket is evaluated instead; it does not equal the form above.
    """
    q = as_qreal(q).q
    m = n * (n - 1) // 2
    l1q = math.log1p(-q)
    bracket = _lqp(q, n) - n * l1q
    tail = sum(j * l1q - _lqp(q, j) for j in range(1, n + 1))
    if printed:
        la = m * math.log(q) + m * l1q + n * bracket + tail
    else:
        la = -m * math.log(q) + m * l1q + (n + 1) * bracket + tail
    return _result(la, _sign_power(m), Method.CLOSED_FORM, n,
                   {"family": "rs-H", "q": q, "form": "printed" if printed else "rearranged"})


@dataclass(frozen=True)
class QLimitResult:
    n: int
    q_grid: tuple
    abs_values: tuple
    decreasing_tail: bool
    final_abs: float
    passed: bool


def rs_disc_q_limit(nmax, q_grid, threshold=1e-6, tail=3):
    """|D(H_n, q)| along q_grid for 2 <= n <= nmax, from the rearranged form.

    Passes when the last ``tail`` values decrease strictly and the value at
    the end of the grid is below ``threshold``.
    """
    q_grid = tuple(float(x) for x in q_grid)
    if any(not 0 < x < 1 for x in q_grid) or any(b <= a for a, b in zip(q_grid, q_grid[1:])):
        raise DomainError("q_grid must increase inside (0, 1)")
    out = []
    for n in range(2, nmax + 1):
        vals = tuple(math.exp(rs_disc3(q, n).log_abs) for q in q_grid)
        t = vals[-tail:]
        dec = all(b < a for a, b in zip(t, t[1:]))
        out.append(QLimitResult(n, q_grid, vals, dec, vals[-1], dec and vals[-1] < threshold))
    return out


# --------------------------------------------------------------------------
# tables
# --------------------------------------------------------------------------

DISC_TABLE_HEADER = ("family", "params", "n", "method", "log_abs", "phase_re", "phase_im",
                     "rel_agreement")


def _fmt_params(params):
    return ";".join(f"{k}={params[k]}" for k in sorted(params) if k != "family")


def disc_table_rows(pairs):
    """Rows for (result, reference) pairs; agreement is relative to the reference."""
    rows = []
    for res, ref in pairs:
        fam = res.params.get("family", "")
        agree = res.rel_diff(ref) if ref is not None else 0.0
        rows.append([fam, _fmt_params(res.params), res.n, res.method.value,
                     repr(res.log_abs), repr(res.phase.real), repr(res.phase.imag), repr(agree)])
    return rows


def write_disc_table(path, pairs):
    write_csv(path, DISC_TABLE_HEADER, disc_table_rows(pairs))
