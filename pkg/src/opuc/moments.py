"""Weights on the unit circle, their trigonometric moments, Toeplitz
determinants and the moment (Cholesky) construction of orthonormal systems.

Measure convention: every integral is against ``w(theta) dtheta`` with the
weight normalised to total mass 1, i.e. ``dzeta/(i zeta)`` on |zeta| = 1.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, solve_triangular
from scipy.special import betaln, gammaln, roots_jacobi

from .errors import (
    ConfigError,
    DomainError,
    GridTooCoarse,
    NotPositiveDefinite,
    QuadratureNotConverged,
    SingularMatrix,
)
from .poly import ComplexPoly, as_qreal
from .special import BESSEL_T_MAX, bessel_i, jacobi_p, q_pochhammer
from .system import OPUCSystem, Route

__all__ = [
    "Family",
    "WeightSpec",
    "QuadratureRule",
    "MomentTable",
    "default_grid_size",
    "quadrature_rule",
    "trig_moments",
    "toeplitz_det",
    "system_from_moments",
    "inner_product",
]


class Family(str, enum.Enum):
    LEBESGUE = "lebesgue"
    CIRCULAR_JACOBI = "cj"
    SZEGO = "sz"
    MODIFIED_BESSEL = "mb"
    ROGERS_SZEGO = "rs"
    CUSTOM = "custom"


@dataclass(frozen=True)
class WeightSpec:
    """A weight family with its parameters, validated on construction."""

    family: Family
    a: float | None = None
    b: float | None = None
    t: float | None = None
    q: float | None = None
    moments: tuple | None = None  # custom: c_0 ... c_N as complex

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        fam = self.family
        if fam is Family.CIRCULAR_JACOBI:
            _need(self.a, "a")
            if not self.a > -0.5:
                raise DomainError(f"circular Jacobi needs a > -1/2, got a={self.a}")
        elif fam is Family.SZEGO:
            _need(self.a, "a")
            _need(self.b, "b")
            if not (self.a > -0.5 and self.b > -0.5):
                raise DomainError(f"Szego weight needs a, b > -1/2, got a={self.a}, b={self.b}")
        elif fam is Family.MODIFIED_BESSEL:
            _need(self.t, "t")
            if not abs(self.t) <= BESSEL_T_MAX:
                raise DomainError(f"modified Bessel weight needs |t| <= {BESSEL_T_MAX}")
        elif fam is Family.ROGERS_SZEGO:
            _need(self.q, "q")
            as_qreal(self.q)
        elif fam is Family.CUSTOM:
            if not self.moments:
                raise DomainError("custom weight needs at least c_0")
            c = tuple(complex(x) for x in self.moments)
            if not (abs(c[0].imag) <= 1e-14 * abs(c[0]) and c[0].real > 0):
                raise DomainError("custom moments need a real positive c_0")
            # rescale so the measure has unit mass
            c0 = c[0].real
            object.__setattr__(self, "moments", tuple(x / c0 for x in c))

    # constructors ------------------------------------------------------
    @classmethod
    def lebesgue(cls):
        return cls(Family.LEBESGUE)

    @classmethod
    def circular_jacobi(cls, a):
        return cls(Family.CIRCULAR_JACOBI, a=float(a))

    @classmethod
    def szego(cls, a, b):
        return cls(Family.SZEGO, a=float(a), b=float(b))

    @classmethod
    def modified_bessel(cls, t):
        return cls(Family.MODIFIED_BESSEL, t=float(t))

    @classmethod
    def rogers_szego(cls, q):
        return cls(Family.ROGERS_SZEGO, q=float(q))

    @classmethod
    def custom(cls, moments):
        return cls(Family.CUSTOM, moments=tuple(complex(m) for m in moments))

    # ------------------------------------------------------------------
    @property
    def params(self):
        out = {}
        for k in ("a", "b", "t", "q"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        return out

    def label(self):
        if not self.params:
            return self.family.value
        inner = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family.value}({inner})"

    @property
    def normalization(self):
        """Constant multiplying the bare weight so that its mass is 1."""
        fam = self.family
        if fam is Family.LEBESGUE:
            return 1.0 / (2 * math.pi)
        if fam is Family.CIRCULAR_JACOBI:
            a = self.a
            return math.exp(2 * gammaln(a + 1) - gammaln(2 * a + 1)) / (2 * math.pi)
        if fam is Family.SZEGO:
            a, b = self.a, self.b
            return 2.0 ** (-1 - 2 * a - 2 * b) * math.exp(
                gammaln(a + b + 1) - gammaln(a + 0.5) - gammaln(b + 0.5))
        if fam is Family.MODIFIED_BESSEL:
            return 1.0 / (2 * math.pi * bessel_i(0, self.t))
        if fam is Family.ROGERS_SZEGO:
            # the triple product gives mass 1/(q;q)_inf for the bare product
            return q_pochhammer(self.q, self.q) / (2 * math.pi)
        raise DomainError("custom weights have no pointwise density")

    def density(self, theta):
        """Normalised w(e^{i theta}) for real theta."""
        theta = np.asarray(theta, dtype=np.float64)
        fam = self.family
        c = self.normalization
        if fam is Family.LEBESGUE:
            return np.full(theta.shape, c)
        if fam is Family.CIRCULAR_JACOBI:
            return c * (2.0 - 2.0 * np.cos(theta)) ** self.a
        if fam is Family.SZEGO:
            x = np.cos(theta)
            return c * (2.0 - 2.0 * x) ** self.a * (2.0 + 2.0 * x) ** self.b
        if fam is Family.MODIFIED_BESSEL:
            return c * np.exp(self.t * np.cos(theta))
        if fam is Family.ROGERS_SZEGO:
            z = np.exp(1j * theta)
            s = math.sqrt(self.q)
            prod = q_pochhammer(s * z, self.q) * q_pochhammer(s / z, self.q)
            return c * prod.real
        raise DomainError("custom weights have no pointwise density")

    def has_density(self):
        return self.family is not Family.CUSTOM

    def uses_jacobi_rule(self):
        return self.family in (Family.CIRCULAR_JACOBI, Family.SZEGO)

    # serialisation -----------------------------------------------------
    def to_json_dict(self):
        d = {"family": self.family.value}
        d.update(self.params)
        if self.moments is not None:
            d["moments"] = [[m.real, m.imag] for m in self.moments]
        return d

    @classmethod
    def from_json_dict(cls, d):
        d = dict(d)
        fam = d.pop("family")
        if "moments" in d:
            d["moments"] = tuple(complex(re, im) for re, im in d["moments"])
        return cls(Family(fam), **d)


def _need(v, name):
    if v is None or not np.isfinite(v):
        raise DomainError(f"weight parameter {name} is required and must be finite")


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

def default_grid_size(N):
    env = os.environ.get("OPUC_GRID_M")
    if env:
        try:
            m = int(env)
        except ValueError:
            raise ConfigError(f"OPUC_GRID_M must be an integer, got {env!r}") from None
        if m <= 0:
            raise ConfigError("OPUC_GRID_M must be positive")
        return m
    return max(256, 8 * N + 8)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes on |zeta| = 1 and weights with sum(weights * f(nodes)) ~ integral of f w dtheta."""

    nodes: np.ndarray
    weights: np.ndarray
    M: int
    kind: str

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, values):
        """Fixed-order sum of weights * values along the last axis."""
        return np.sum(self.weights * values, axis=-1)


def _gauss_jacobi_angles(K, alpha, beta, newton_steps=3):
    """Gauss-Jacobi rule in the angle variable x = cos(theta).

    Library nodes are refined by Newton steps in theta, which stays well
    conditioned near x = +-1 where the x-nodes cluster. Weights come from
    1/((1 - x^2) P_K'(x)^2), rescaled to the exact total mass.
    """
    x, _ = roots_jacobi(K, alpha, beta)
    theta = np.arccos(x)
    dscale = 0.5 * (K + alpha + beta + 1)
    for _ in range(newton_steps):
        c = np.cos(theta)
        p = jacobi_p(K, alpha, beta, c)
        dp = dscale * jacobi_p(K - 1, alpha + 1, beta + 1, c) if K > 0 else 0 * c
        theta = theta + p / (np.sin(theta) * dp)
    c, s = np.cos(theta), np.sin(theta)
    dp = dscale * jacobi_p(K - 1, alpha + 1, beta + 1, c)
    w = 1.0 / (s * s * dp * dp)
    mass = math.exp((alpha + beta + 1) * math.log(2.0) + betaln(alpha + 1, beta + 1))
    return theta, w * (mass / np.sum(w))


@lru_cache(maxsize=64)
def _rule_cached(weight, M):
    if weight.uses_jacobi_rule():
        # x = cos(theta) turns the algebraic factors into a Jacobi weight;
        # each Gauss-Jacobi node gives the conjugate pair exp(+-i arccos x).
        K = max(M // 2, 1)
        a = weight.a
        b = weight.b if weight.family is Family.SZEGO else 0.0
        theta, lam = _gauss_jacobi_angles(K, a - 0.5, b - 0.5)
        scale = weight.normalization * 2.0 ** (a + b)
        nodes = np.concatenate([np.exp(1j * theta), np.exp(-1j * theta)])
        weights = np.concatenate([lam, lam]) * scale
        return QuadratureRule(nodes, weights, 2 * K, "gauss-jacobi")
    theta = 2 * math.pi * np.arange(M) / M
    weights = weight.density(theta) * (2 * math.pi / M)
    return QuadratureRule(np.exp(1j * theta), weights, M, "trapezoid")


def quadrature_rule(weight: WeightSpec, M=None, N=0):
    if not weight.has_density():
        raise DomainError("custom weights are given by moments only; no quadrature rule")
    if M is None:
        M = default_grid_size(N)
    return _rule_cached(weight, int(M))


# --------------------------------------------------------------------------
# moments
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentTable:
    """c_j = integral of zeta^{-j} w dtheta for -N <= j <= N."""

    values: np.ndarray  # index j + N
    N: int
    M: int
    weight: WeightSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        self.values.setflags(write=False)

    def c(self, j):
        if abs(j) > self.N:
            raise IndexError(f"moment c_{j} outside the table (N={self.N})")
        return complex(self.values[j + self.N])

    def gram(self, n):
        """(n+1)x(n+1) matrix G[j, k] = (z^j, z^k) = c_{k-j}."""
        idx = np.arange(n + 1)
        return self.values[(idx[None, :] - idx[:, None]) + self.N]


def _moments_from_rule(rule, N):
    j = np.arange(-N, N + 1)
    powers = rule.nodes[None, :] ** (-j[:, None])
    return rule.integrate(powers)


def trig_moments(weight: WeightSpec, N, M=None, drift_tol=1e-10, max_doublings=4):
    """Trigonometric moments by the weight's quadrature rule.

    The grid is doubled until the moments move by less than ``drift_tol``.
    """
    if N < 0:
        raise DomainError("N must be nonnegative")
    if weight.family is Family.CUSTOM:
        given = weight.moments
        if len(given) < N + 1:
            raise DomainError(f"custom weight supplies c_0..c_{len(given) - 1}, need c_{N}")
        pos = np.array(given[: N + 1], dtype=np.complex128)
        vals = np.concatenate([np.conj(pos[:0:-1]), pos])
        return MomentTable(vals, N, 0, weight)
    if M is None:
        M = default_grid_size(N)
    if M < 2 * N + 2:
        raise GridTooCoarse(f"grid of {M} points cannot resolve moments up to |j| = {N}")
    vals = _moments_from_rule(quadrature_rule(weight, M), N)
    for _ in range(max_doublings):
        M2 = 2 * M
        vals2 = _moments_from_rule(quadrature_rule(weight, M2), N)
        drift = float(np.max(np.abs(vals2 - vals)))
        if drift < drift_tol:
            return MomentTable(vals, N, M, weight)
        vals, M = vals2, M2
    raise QuadratureNotConverged(f"moments still drift by {drift:.3e} at M={M}")


def toeplitz_det(m: MomentTable, n):
    """Determinant of (c_{j-k})_{0<=j,k<n} as (log|det|, det/|det|)."""
    if n < 0 or n > m.N + 1:
        raise DomainError(f"determinant order {n} exceeds the moment table")
    if n == 0:
        return 0.0, 1.0 + 0j
    idx = np.arange(n)
    T = m.values[(idx[:, None] - idx[None, :]) + m.N]
    lu, piv = lu_factor(T, check_finite=True)
    d = np.diag(lu)
    if np.min(np.abs(d)) < 1e-300:
        raise SingularMatrix(f"Toeplitz matrix of order {n} is singular")
    swaps = int(np.sum(piv != np.arange(n)))
    log_abs = float(np.sum(np.log(np.abs(d))))
    phase = complex(np.prod(d / np.abs(d))) * (-1) ** swaps
    return log_abs, phase


def system_from_moments(m: MomentTable, N=None):
    """Orthonormal system from the Cholesky factor of the moment Gram matrix."""
    if N is None:
        N = m.N
    if N > m.N:
        raise DomainError(f"need moments up to c_{N}, table has c_{m.N}")
    G = m.gram(N)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(_first_failing_order(G)) from None
    if np.min(np.real(np.diag(L))) <= 0:
        raise NotPositiveDefinite(_first_failing_order(G))
    A = solve_triangular(L, np.eye(N + 1), lower=True)
    polys = []
    for n in range(N + 1):
        row = A[n, : n + 1].copy()
        # rows of L^{-1} have real positive diagonal; clear roundoff in the imaginary part
        row[n] = row[n].real
        polys.append(ComplexPoly(row))
    return OPUCSystem.from_polys(polys, m.weight, Route.MOMENTS)


def _first_failing_order(G):
    for k in range(1, G.shape[0] + 1):
        try:
            np.linalg.cholesky(G[:k, :k])
        except np.linalg.LinAlgError:
            return k - 1
    return G.shape[0] - 1


def inner_product(f: ComplexPoly, g: ComplexPoly, weight: WeightSpec, M=None):
    """(f, g) = integral of f conj(g) w dtheta."""
    if weight.family is Family.CUSTOM:
        n = max(f.degree, g.degree)
        m = trig_moments(weight, n)
        return complex(f.padded(n) @ m.gram(n) @ np.conj(g.padded(n)))
    rule = quadrature_rule(weight, M, max(f.degree, g.degree))
    vals = f(rule.nodes) * np.conj(g(rule.nodes))
    return complex(rule.integrate(vals))
