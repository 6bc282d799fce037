"""Orthonormal polynomial systems on the unit circle and the coefficient
relations they satisfy."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import kernels
from .errors import DegenerateReflection, InvalidReflectionData, PoleAtUnimodularProduct
from .poly import ComplexPoly

__all__ = [
    "Route",
    "OPUCSystem",
    "build_from_phi0",
    "build_from_reflections",
    "szego_residuals",
    "three_term_residual",
    "subleading_from_sum",
    "kl_residual",
    "cd_kernel",
    "cd_residual",
]


class Route(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    SZEGO_RECURRENCE = "SzegoRecurrence"
    MOMENTS = "Moments"


@dataclass(frozen=True)
class OPUCSystem:
    """phi_0 ... phi_N with their leading, subleading and constant terms.

    Arrays are read-only; ``phistar[n]`` is the reciprocal of ``phi[n]``.
    """

    kappa: np.ndarray
    phi0: np.ndarray
    ell: np.ndarray
    phi: tuple
    phistar: tuple
    weight: Any = None
    route: Route = Route.SZEGO_RECURRENCE
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.kappa, self.phi0, self.ell):
            arr.setflags(write=False)

    @property
    def N(self):
        return self.kappa.size - 1

    @property
    def reflections(self):
        """r_n = phi_n(0)/kappa_n."""
        return self.phi0 / self.kappa

    @classmethod
    def from_polys(cls, polys, weight=None, route=Route.CLOSED_FORM, meta=None, phistar=None):
        polys = tuple(polys)
        kappa = np.array([p.leading.real for p in polys])
        phi0 = np.array([p.coeffs[0] for p in polys], dtype=np.complex128)
        ell = np.array([0j] + [p.coeffs[-2] for p in polys[1:]], dtype=np.complex128)
        if phistar is None:
            phistar = tuple(p.reciprocal() for p in polys)
        return cls(kappa, phi0, ell, polys, tuple(phistar), weight, route, dict(meta or {}))

    def coeff_matrix(self):
        out = np.zeros((self.N + 1, self.N + 1), dtype=np.complex128)
        for n, p in enumerate(self.phi):
            out[n, : p.coeffs.size] = p.coeffs
        return out

    def truncated(self, N):
        return OPUCSystem.from_polys(self.phi[: N + 1], self.weight, self.route, self.meta,
                                     self.phistar[: N + 1])

    def require_nonzero_phi0(self, *ns):
        for n in ns:
            if n < 0 or n > self.N:
                raise IndexError(f"degree {n} outside 0..{self.N}")
            if abs(self.phi0[n]) <= 1e-300:
                raise DegenerateReflection(
                    f"phi_{n}(0) = 0: the relation divides by phi_{n}(0) and degenerates")

    # serialisation ------------------------------------------------------
    def to_json_dict(self):
        pair = lambda z: [float(z.real), float(z.imag)]  # noqa: E731
        return {
            "schema": 1,
            "N": int(self.N),
            "route": self.route.value,
            "weight": None if self.weight is None else self.weight.to_json_dict(),
            "kappa": [float(k) for k in self.kappa],
            "phi0": [pair(z) for z in self.phi0],
            "ell": [pair(z) for z in self.ell],
            "phi": [[pair(c) for c in p.coeffs] for p in self.phi],
            "meta": self.meta,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_json_dict(), **kw)

    @classmethod
    def from_json_dict(cls, d):
        from .moments import WeightSpec

        polys = [ComplexPoly([complex(re, im) for re, im in cs]) for cs in d["phi"]]
        weight = None if d.get("weight") is None else WeightSpec.from_json_dict(d["weight"])
        return cls.from_polys(polys, weight, Route(d["route"]), d.get("meta") or {})


def build_from_phi0(phi0_seq, kappa0=1.0, weight=None):
    """Run the Szego recurrence from the constant terms phi_1(0), phi_2(0), ...

    ``phi0_seq`` lists phi_n(0) for n = 1..N; phi_0 is the constant kappa0.
    """
    phi0_seq = np.asarray(phi0_seq, dtype=np.complex128).ravel()
    if not (np.isfinite(kappa0) and kappa0 > 0):
        raise InvalidReflectionData(f"kappa_0 must be positive, got {kappa0!r}")
    if not np.all(np.isfinite(phi0_seq)):
        raise InvalidReflectionData("phi_n(0) sequence contains non-finite values")
    full = np.concatenate([[complex(kappa0)], phi0_seq])
    coef, kappa = kernels.szego_build(full, float(kappa0))
    for n in range(1, kappa.size):
        if not (kappa[n] > 0) or abs(full[n]) >= kappa[n]:
            raise InvalidReflectionData(f"|phi_{n}(0)| must stay below kappa_{n}")
    polys = [ComplexPoly(coef[n, : n + 1]) for n in range(kappa.size)]
    return OPUCSystem.from_polys(polys, weight, Route.SZEGO_RECURRENCE)


def build_from_reflections(r_seq, weight=None):
    """Szego recurrence from reflection coefficients r_n = phi_n(0)/kappa_n, n >= 1."""
    r_seq = np.asarray(r_seq, dtype=np.complex128).ravel()
    if np.any(np.abs(r_seq) >= 1):
        raise InvalidReflectionData("reflection coefficients must lie in the open unit disk")
    kappa = 1.0
    phi0 = []
    for r in r_seq:
        kappa = kappa / math.sqrt(1.0 - abs(r) ** 2)
        phi0.append(r * kappa)
    return build_from_phi0(phi0, 1.0, weight)


def _rel(res, scale):
    return float(res / scale) if scale > 0 else float(res)


def szego_residuals(sys: OPUCSystem):
    """Largest coefficientwise relative residuals of both Szego recurrences.

    rec1: kappa_n z phi_n = kappa_{n+1} phi_{n+1} - phi_{n+1}(0) phi_{n+1}^*
    rec2: kappa_n phi_{n+1} = kappa_{n+1} z phi_n + phi_{n+1}(0) phi_n^*
    """
    worst1 = worst2 = 0.0
    for n in range(sys.N):
        k0, k1, a = sys.kappa[n], sys.kappa[n + 1], sys.phi0[n + 1]
        zphi = sys.phi[n].shift(1)
        lhs1 = k0 * zphi
        rhs1 = k1 * sys.phi[n + 1] - a * sys.phistar[n + 1]
        r1 = np.max(np.abs((lhs1 - rhs1).padded(n + 1)))
        lhs2 = k0 * sys.phi[n + 1]
        rhs2 = k1 * zphi + a * sys.phistar[n]
        r2 = np.max(np.abs((lhs2 - rhs2).padded(n + 1)))
        scale = k0 * k1
        worst1 = max(worst1, _rel(r1, scale))
        worst2 = max(worst2, _rel(r2, scale))
    return worst1, worst2


def three_term_residual(sys: OPUCSystem, n, z_samples=None):
    """Relative residual of the three-term recurrence linking phi_{n-1}, phi_n, phi_{n+1}.

    With ``z_samples`` the residual is taken pointwise; without, coefficientwise.
    """
    if not (1 <= n <= sys.N - 1):
        raise IndexError(f"need 1 <= n <= N-1, got n={n}")
    sys.require_nonzero_phi0(n, n + 1)
    k_m, k_n, k_p = sys.kappa[n - 1], sys.kappa[n], sys.kappa[n + 1]
    a_n, a_p = sys.phi0[n], sys.phi0[n + 1]
    t1 = k_n * a_n * sys.phi[n + 1]
    t2 = k_m * a_p * sys.phi[n - 1].shift(1)
    t3 = (k_n * a_p) * sys.phi[n] + (k_p * a_n) * sys.phi[n].shift(1)
    if z_samples is None:
        res = np.max(np.abs((t1 + t2 - t3).padded(n + 1)))
        scale = max(t1.max_abs(), t2.max_abs(), t3.max_abs())
        return _rel(res, scale)
    z = np.asarray(z_samples, dtype=np.complex128)
    v1, v2, v3 = t1(z), t2(z), t3(z)
    scale = float(np.max(np.abs(np.concatenate([v1, v2, v3]))))
    return _rel(np.max(np.abs(v1 + v2 - v3)), scale)


def subleading_from_sum(sys: OPUCSystem, n):
    """l_n as kappa_n times the sum of conj(phi_j(0)) phi_{j+1}(0)/(kappa_j kappa_{j+1})."""
    if not (1 <= n <= sys.N):
        raise IndexError(f"need 1 <= n <= N, got n={n}")
    k, a = sys.kappa, sys.phi0
    terms = np.conj(a[:n]) * a[1 : n + 1] / (k[:n] * k[1 : n + 1])
    return complex(k[n] * np.sum(terms))


def kl_residual(sys: OPUCSystem, n):
    """Relative residual of kappa_n l_{n+1} = kappa_{n+1} l_n + conj(phi_n(0)) phi_{n+1}(0)."""
    k, l, a = sys.kappa, sys.ell, sys.phi0
    lhs = k[n] * l[n + 1]
    rhs = k[n + 1] * l[n] + np.conj(a[n]) * a[n + 1]
    scale = max(abs(lhs), abs(k[n + 1] * l[n]), abs(a[n] * a[n + 1]), k[n] * k[n + 1] * 1e-300)
    return _rel(abs(lhs - rhs), scale) if scale > 0 else 0.0


def cd_kernel(sys: OPUCSystem, n, a, z):
    """Sum over k <= n of conj(phi_k(a)) phi_k(z), summed directly."""
    if n + 1 > sys.N:
        raise IndexError("the closed form needs phi_{n+1}; build the system one degree higher")
    a = complex(a)
    z = complex(z)
    return complex(sum(np.conj(sys.phi[k](a)) * sys.phi[k](z) for k in range(n + 1)))


def cd_closed_form(sys: OPUCSystem, n, a, z):
    a = complex(a)
    z = complex(z)
    den = 1.0 - np.conj(a) * z
    if abs(den) < 1e-13:
        raise PoleAtUnimodularProduct("1 - conj(a) z vanishes")
    ps, p = sys.phistar[n + 1], sys.phi[n + 1]
    return complex((np.conj(ps(a)) * ps(z) - np.conj(p(a)) * p(z)) / den)


def cd_residual(sys: OPUCSystem, n, a, z):
    lhs = cd_kernel(sys, n, a, z)
    rhs = cd_closed_form(sys, n, a, z)
    # scale: sum of |phi_k(a)||phi_k(z)| bounds the direct sum's size
    scale = sum(abs(sys.phi[k](a)) * abs(sys.phi[k](z)) for k in range(n + 1))
    return _rel(abs(lhs - rhs), scale)
