"""Verification suites, reports and run configuration.

Each suite takes a family, its parameters and a size, runs one group of
identities and returns a list of checks (residual against tolerance). A run
configuration is a list of such suite invocations; parameters given as lists
expand into a grid.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from ._io import atomic_write_text, write_csv
from .errors import ConfigError, DomainError, OPUCError
from .moments import Family, WeightSpec

__all__ = [
    "Check",
    "VerificationReport",
    "Suite",
    "SUITES",
    "RunSpec",
    "make_weight",
    "make_system",
    "run_suite",
    "expand_config",
    "load_config",
    "parse_config_text",
    "DEFAULT_CONFIG",
    "run_config",
    "aggregate",
    "aggregate_json",
    "summary_table",
    "write_plot_data",
    "write_checks_csv",
    "explain",
    "SCHEMA",
]

SCHEMA = 1


# --------------------------------------------------------------------------
# report types
# --------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    scale: float = 1.0
    n: int | None = None

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)  # NaN fails

    def to_dict(self):
        return {"name": self.name, "residual": _num(self.residual), "scale": _num(self.scale),
                "tolerance": _num(self.tolerance), "pass": self.passed, "n": self.n}


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class VerificationReport:
    suite: str
    anchor: str
    family: str
    params: dict
    N: int
    checks: list = field(default_factory=list)
    runtime_ms: int = 0
    config_hash: str = ""
    error: dict | None = None

    @property
    def passed(self):
        return self.error is None and all(c.passed for c in self.checks)

    @property
    def exit_code(self):
        if self.error is not None:
            return int(self.error["exit_code"])
        return 0 if self.passed else 2

    def worst(self):
        """Check with the largest residual/tolerance ratio."""
        best, ratio = None, -1.0
        for c in self.checks:
            r = c.residual / c.tolerance if c.tolerance > 0 else (0.0 if c.residual <= 0 else math.inf)
            if math.isnan(r):
                r = math.inf
            if r > ratio:
                best, ratio = c, r
        return best

    def to_dict(self, with_runtime=True):
        d = {"schema": SCHEMA, "suite": self.suite, "anchor": self.anchor, "family": self.family,
             "params": self.params, "N": self.N, "checks": [c.to_dict() for c in self.checks],
             "pass": self.passed, "config_hash": self.config_hash, "error": self.error}
        if with_runtime:
            d["runtime_ms"] = self.runtime_ms
        return d


# --------------------------------------------------------------------------
# building blocks
# --------------------------------------------------------------------------

SAMPLES = 0.5 * np.exp(2j * np.pi * (np.arange(16) + 0.37) / 16)
OFF_ZERO = 0.7 * np.exp(2j * np.pi * (np.arange(8) + 0.31) / 8) + 0.05


def make_weight(family, params):
    fam = Family(family)
    p = params
    if fam is Family.LEBESGUE:
        return WeightSpec.lebesgue()
    if fam is Family.CIRCULAR_JACOBI:
        return WeightSpec.circular_jacobi(_req(p, "a"))
    if fam is Family.SZEGO:
        return WeightSpec.szego(_req(p, "a"), _req(p, "b"))
    if fam is Family.MODIFIED_BESSEL:
        return WeightSpec.modified_bessel(_req(p, "t"))
    if fam is Family.ROGERS_SZEGO:
        return WeightSpec.rogers_szego(_req(p, "q"))
    raise DomainError(f"family {family!r} has no weight constructor here")


def _req(params, key):
    if key not in params:
        raise DomainError(f"missing parameter {key!r}")
    return float(params[key])


def _random_reflections(params, N):
    rng = np.random.default_rng(int(params.get("seed", 0)))
    rmax = float(params.get("rmax", 0.9))
    if not 0 < rmax < 1:
        raise DomainError("rmax must lie in (0, 1)")
    rad = rmax * np.sqrt(rng.uniform(0, 1, N))
    return rad * np.exp(2j * np.pi * rng.uniform(0, 1, N))


def make_system(family, params, N, route=None):
    from .families import system_for
    from .system import Route, build_from_reflections

    if family == "random":
        return build_from_reflections(_random_reflections(params, N))
    w = make_weight(family, params)
    return system_for(w, N, Route(route or params.get("route", "ClosedForm")))


def _need_family(ctx, *fams):
    if ctx.family not in fams:
        raise DomainError(f"suite {ctx.suite} covers families {', '.join(fams)}, not {ctx.family}")


@dataclass
class _Ctx:
    suite: str
    family: str
    params: dict
    N: int
    tol: dict
    defaults: dict

    def t(self, key):
        if key in self.tol:
            return float(self.tol[key])
        if "*" in self.tol:
            return float(self.tol["*"])
        return self.defaults[key]

    def rng(self):
        return np.random.default_rng(int(self.params.get("seed", 0)))


def _rel_poly(p, ref):
    n = max(p.degree, ref.degree)
    return float(np.max(np.abs(p.padded(n) - ref.padded(n))) / ref.max_abs())


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------

def _suite_recurrences(ctx):
    from .system import kl_residual, subleading_from_sum, szego_residuals, three_term_residual

    sys = make_system(ctx.family, ctx.params, ctx.N)
    tol = ctx.t("coeff")
    r1, r2 = szego_residuals(sys)
    out = [Check("forward Szego recurrence", r1, tol), Check("reciprocal Szego recurrence", r2, tol)]
    k2 = np.cumsum(np.abs(sys.phi0) ** 2)
    out.append(Check("kappa^2 = sum |phi_k(0)|^2",
                     float(np.max(np.abs(sys.kappa**2 - k2) / sys.kappa**2)), tol))
    out.append(Check("kappa/l recurrence", max(kl_residual(sys, n) for n in range(sys.N)), tol))
    lres = max(abs(sys.ell[n] - subleading_from_sum(sys, n)) / sys.kappa[n] for n in range(1, sys.N + 1))
    out.append(Check("l_n from the reflection sum", float(lres), tol))
    tt = [three_term_residual(sys, n) for n in range(1, sys.N)
          if abs(sys.phi0[n]) > 1e-300 and abs(sys.phi0[n + 1]) > 1e-300]
    if tt:
        out.append(Check("three-term recurrence", max(tt), tol))
    return out


def _suite_cd(ctx):
    from .system import cd_residual

    nmax = min(int(ctx.params.get("nmax", 12)), ctx.N)
    sys = make_system(ctx.family, ctx.params, nmax + 1)
    rng = ctx.rng()
    worst = 0.0
    for _ in range(int(ctx.params.get("pairs", 32))):
        a, z = (0.95 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()) for _ in range(2))
        n = int(rng.integers(0, nmax + 1))
        worst = max(worst, cd_residual(sys, n, a, z))
    return [Check("Christoffel-Darboux closed form", worst, ctx.t("cd"))]


def _classical(ctx, extra=1):
    from .fields import field_for

    _need_family(ctx, "cj", "sz", "mb")
    nmax = int(ctx.params.get("nmax", min(ctx.N, 8)))
    sys = make_system(ctx.family, ctx.params, nmax + extra + 1)
    return sys, field_for(sys.weight), nmax


def _numeric_pairs(sys, fld, upto):
    from .ladder import ladder_numeric

    return {n: ladder_numeric(sys, fld, n) for n in range(1, upto + 1)}


def _rel_max(x, ref, floor=1.0):
    return float(np.max(np.abs(x - ref)) / max(float(np.max(np.abs(ref))), floor))


def _suite_ladder(ctx):
    from .families import closed_ladder
    from .ladder import lowering_residual, raising_residual

    sys, fld, nmax = _classical(ctx)
    pairs = _numeric_pairs(sys, fld, nmax)
    z = SAMPLES
    out = []
    for n in range(1, nmax + 1):
        c, p = closed_ladder(sys, n), pairs[n]
        out.append(Check(f"A_{n} quadrature vs closed", _rel_max(p.A(z), c.A(z), 1e-300), ctx.t("ab"), n=n))
        out.append(Check(f"B_{n} quadrature vs closed", _rel_max(p.B(z), c.B(z)), ctx.t("ab"), n=n))
        out.append(Check(f"lowering n={n}", lowering_residual(sys, p, n, z), ctx.t("lowering"), n=n))
        if n >= 2:
            out.append(Check(f"raising n={n}", raising_residual(sys, pairs[n - 1], n, z),
                             ctx.t("raising"), n=n))
    return out


def _suite_ode(ctx):
    from .families import cj_P, cj_Q, sz_P, sz_Q
    from .ladder import ode_coefficients, ode_residual

    sys, fld, nmax = _classical(ctx)
    pairs = _numeric_pairs(sys, fld, nmax + 1)
    z = SAMPLES
    w = sys.weight
    out = []
    for n in range(2, nmax + 1):
        P, Q = ode_coefficients(sys, pairs, n, z)
        P2, Q2 = ode_coefficients(sys, pairs, n, z, "second")
        out.append(Check(f"second-order ODE n={n}", ode_residual(sys, n, P, Q, z), ctx.t("ode"), n=n))
        out.append(Check(f"reversed-elimination ODE n={n}", ode_residual(sys, n, P2, Q2, z),
                         ctx.t("ode"), n=n))
        out.append(Check(f"P agrees between both forms n={n}", _rel_max(P2, P), ctx.t("ode"), n=n))
        if ctx.family == "cj":
            out.append(Check(f"P vs family formula n={n}", _rel_max(P, cj_P(w.a, n, z)), ctx.t("pq"), n=n))
            out.append(Check(f"Q vs family formula n={n}", _rel_max(Q, cj_Q(w.a, n, z)), ctx.t("pq"), n=n))
        elif ctx.family == "sz":
            out.append(Check(f"P vs family formula n={n}", _rel_max(P, sz_P(w.a, w.b, n, z)),
                             ctx.t("pq"), n=n))
            out.append(Check(f"Q vs family formula n={n}", _rel_max(Q, sz_Q(w.a, w.b, n, z)),
                             ctx.t("pq"), n=n))
    return out


def _suite_functional_eq(ctx):
    from .families import mb_trailing_terms
    from .ladder import abnew_constant, functional_equation_residual

    sys, fld, nmax = _classical(ctx)
    pairs = _numeric_pairs(sys, fld, nmax)
    z = SAMPLES
    out = [Check(f"functional equation n={n}", functional_equation_residual(sys, pairs, fld, n, z),
                 ctx.t("fe"), n=n) for n in range(2, nmax + 1)]
    vp = fld.vprime(z)
    out.append(Check("integration constant equals -v'(z)",
                     _rel_max(abnew_constant(sys, fld, z), -vp, 1e-300), ctx.t("fe")))
    if ctx.family == "mb":
        t = sys.weight.t
        for n in range(2, nmax + 1):
            s, _ = mb_trailing_terms(sys, t, n)
            out.append(Check(f"trailing terms sum to t/2 n={n}", abs(s - t / 2) / max(abs(t / 2), 1e-300),
                             ctx.t("fe"), n=n))
    return out


def _rs_setup(ctx, extra=1):
    from .families import rs_system
    from .fields import rs_qfield

    _need_family(ctx, "rs")
    q = _req(ctx.params, "q")
    nmax = int(ctx.params.get("nmax", min(ctx.N, 10)))
    return rs_system(q, nmax + extra), rs_qfield(q), q, nmax


def _suite_q_ladder(ctx):
    from .families import rs_ladder
    from .ladder import q_ladder_numeric, q_lowering_residual, q_raising_residual

    sys, qf, q, nmax = _rs_setup(ctx)
    z = SAMPLES
    out = []
    qp = {}
    for n in range(1, nmax + 1):
        A = math.sqrt(1 - q**n) / (1 - q)
        lhs = sys.phi[n].q_difference(q)
        res = _rel_poly(lhs, A * sys.phi[n - 1])
        out.append(Check(f"q-lowering coefficientwise n={n}", res, ctx.t("coeff"), n=n))
        qp[n] = q_ladder_numeric(sys, qf, n, z_samples=z)
        out.append(Check(f"sampled A_{n} = sqrt(1-q^n)/(1-q)", _rel_max(qp[n].A(z), np.full(z.shape, A)),
                         ctx.t("ab"), n=n))
        out.append(Check(f"sampled B_{n} = 0", float(np.max(np.abs(qp[n].B(z)))), ctx.t("ab"), n=n))
        out.append(Check(f"q-lowering sampled n={n}", q_lowering_residual(sys, rs_ladder(q, n), n, q, z),
                         ctx.t("ab"), n=n))
        if n >= 2:
            out.append(Check(f"q-raising n={n}", q_raising_residual(sys, rs_ladder(q, n - 1), n, q, z),
                             ctx.t("ab"), n=n))
    return out


def _suite_q_functional_eq(ctx):
    from .ladder import q_fediff_residual, q_functional_equation_residual, q_ladder_numeric, q_limit_gap

    z = SAMPLES
    if ctx.family == "cj":
        from .families import closed_ladder, closed_system
        from .fields import cj_qfield

        a = _req(ctx.params, "a")
        q = float(ctx.params.get("q", 1 - 1e-4))
        nmax = int(ctx.params.get("nmax", 6))
        sys = closed_system(WeightSpec.circular_jacobi(a), nmax + 2)
        cp = {n: closed_ladder(sys, n) for n in range(1, nmax + 2)}
        fe, gap = q_limit_gap(sys, cp, cj_qfield(a, q), nmax, z)
        return [Check("q-functional equation with classical pairs near q = 1", fe, ctx.t("limit")),
                Check("q-ladder vs classical ladder near q = 1", gap, ctx.t("limit"))]
    sys, qf, q, _ = _rs_setup(ctx, extra=2)
    nmax = int(ctx.params.get("nmax", 6))
    if sys.N < nmax + 1:
        from .families import rs_system
        sys = rs_system(q, nmax + 1)
    qp = {n: q_ladder_numeric(sys, qf, n) for n in range(1, nmax + 2)}
    out = [Check(f"q-difference equation n={n}", q_fediff_residual(sys, qp, qf, n, z), ctx.t("fe"), n=n)
           for n in range(1, nmax + 1)]
    out += [Check(f"q-functional equation n={n}", q_functional_equation_residual(sys, qp, qf, n, z),
                  ctx.t("fe"), n=n) for n in range(2, nmax + 1)]
    return out


def _mb_t(ctx):
    _need_family(ctx, "mb")
    return _req(ctx.params, "t")


def _suite_dpii(ctx):
    from .mbessel import dpii_residual, mb_dpii_solve, mb_system_toeplitz

    t = _mb_t(ctx)
    nmax = int(ctx.params.get("nmax", min(ctx.N, 10)))
    _, seq = mb_system_toeplitz(t, nmax + 1)
    r = np.asarray(seq.r)
    out = [Check(f"discrete Painleve II at n={n}", abs(dpii_residual(r, t, n)), ctx.t("dpii"), n=n)
           for n in range(1, nmax + 1)]
    d = np.asarray(mb_dpii_solve(t, nmax + 1).r)
    out.append(Check("boundary-value route vs Toeplitz route",
                     float(np.max(np.abs(d[: nmax + 1] - r[: nmax + 1]))), ctx.t("dpii")))
    return out


def _suite_rn_ode(ctx):
    from .mbessel import mb_quad_kappa2, mb_rn_ode_integrate, mb_system_toeplitz

    t = _mb_t(ctx)
    n = int(ctx.params.get("n", 5))
    kmax = int(ctx.params.get("nmax", 7))
    sys, seq = mb_system_toeplitz(t, max(n, kmax) + 1)
    ref = seq.r[n]
    rk = mb_rn_ode_integrate(n, t)
    out = [Check(f"RK4 r_{n}({t:g}) vs Toeplitz", abs(rk - ref) / abs(ref), ctx.t("ode"), n=n)]
    for k in range(1, kmax + 1):
        k2 = sys.kappa[k] ** 2
        out.append(Check(f"kappa_{k}^2 from the quadrature identity", abs(mb_quad_kappa2(k, t) - k2) / k2,
                         ctx.t("ode"), n=k))
    return out


def _suite_coeff_dynamics(ctx):
    from .mbessel import mb_coefficient_odes

    t = _mb_t(ctx)
    out = []
    for n in range(int(ctx.params.get("nmin", 2)), int(ctx.params.get("nmax", 6)) + 1):
        res = mb_coefficient_odes(t, n)
        for key in sorted(res):
            out.append(Check(f"{key} t-derivative relation n={n}", float(res[key]), ctx.t("fd"), n=n))
    return out


def _suite_zeros(ctx):
    from .families import closed_ladder, sz_Q
    from .fields import field_for
    from .zeros import (assert_in_disk, cj_constant_q, cj_log_t, cj_stationarity_residual,
                        log_t_function, ode_at_zeros_residual, q_from_ode, reconstruction_error, roots,
                        stationarity_residual, sz_stationarity_residual)

    nmax = int(ctx.params.get("nmax", min(ctx.N, 15)))
    smax = int(ctx.params.get("stat_nmax", 12))
    sys = make_system(ctx.family, ctx.params, max(nmax, smax) + 1)
    out = []
    fld = None
    if ctx.family in ("cj", "sz", "mb"):
        fld = field_for(sys.weight)
    w = sys.weight
    for n in range(1, nmax + 1):
        rs = roots(sys.phi[n])
        inside = assert_in_disk(rs)
        out.append(Check(f"zeros inside the disk n={n}", 0.0 if inside else 1.0, 0.0, n=n))
        out.append(Check(f"root reconstruction n={n}", reconstruction_error(sys.phi[n], rs), ctx.t("coeff"), n=n))
        out.append(Check(f"root backward residual n={n}", float(np.max(rs.residuals)), ctx.t("backward"), n=n))
        if fld is None or n > smax or ctx.family == "lebesgue":
            continue
        A = closed_ladder(sys, n).A
        st = stationarity_residual(rs.roots, fld, A, n)
        out.append(Check(f"stationarity n={n}", st.residual, ctx.t("stat"), n=n))
        out.append(Check(f"pair sum vs f''/f' n={n}", st.pair_sum_residual, ctx.t("pair"), n=n))

        def P(zz, A=A, n=n):
            return -(n - 1) / zz - fld.vprime(zz) - A.derivative(zz) / A(zz)

        out.append(Check(f"ODE at the zeros n={n}", ode_at_zeros_residual(sys.phi[n], rs.roots, P),
                         ctx.t("stat"), n=n))
        if ctx.family == "cj":
            out.append(Check(f"circular Jacobi stationarity n={n}",
                             cj_stationarity_residual(rs.roots, w.a).residual, ctx.t("stat"), n=n))
            _, spread = cj_constant_q(sys.phi[n], w.a, n, OFF_ZERO)
            out.append(Check(f"constant Q across samples n={n}", spread, ctx.t("stat"), n=n))
            if n >= 2:
                base = log_t_function(rs.roots, fld, A, n) - cj_log_t(rs.roots, w.a)
                probe = rs.roots * 0.9 + 0.01j
                other = log_t_function(probe, fld, A, n) - cj_log_t(probe, w.a)
                out.append(Check(f"T-functions differ by a constant n={n}",
                                 abs(np.exp(other - base) - 1), ctx.t("stat"), n=n))
        elif ctx.family == "sz":
            out.append(Check(f"Szego stationarity n={n}",
                             sz_stationarity_residual(rs.roots, w.a, w.b).residual, ctx.t("stat"), n=n))
            Qv = q_from_ode(sys.phi[n], P, OFF_ZERO)
            out.append(Check(f"Q(z) vs family formula n={n}", _rel_max(Qv, sz_Q(w.a, w.b, n, OFF_ZERO)),
                             ctx.t("stat"), n=n))
        if n >= 2:
            zs = rs.roots
            a1 = log_t_function(zs, fld, A, n)
            a2 = log_t_function(zs[::-1].copy(), fld, A, n)
            out.append(Check(f"T permutation invariance n={n}", abs(np.exp(a2 - a1) - 1), ctx.t("perm"), n=n))
    return out


def _suite_delta(ctx):
    from .discriminants import cj_delta, delta, sz_delta

    nmax = int(ctx.params.get("nmax", min(ctx.N, 10)))
    sys = make_system(ctx.family, ctx.params, nmax)
    out = []
    for n in range(1, nmax + 1):
        brute, closed = delta(sys, n)
        out.append(Check(f"Delta_{n} root product vs closed form", brute.rel_diff(closed), ctx.t("delta"), n=n))
        fam = None
        if ctx.family == "cj":
            fam = cj_delta(sys.weight.a, n)
        elif ctx.family == "sz":
            fam = sz_delta(sys.weight.a, sys.weight.b, n)
        if fam is not None:
            out.append(Check(f"Delta_{n} family formula vs closed form", fam.rel_diff(closed),
                             ctx.t("family"), n=n))
    return out


def _suite_gen_disc(ctx):
    from .discriminants import Derivative, QDifference, generalized_discriminant, rs_disc

    nmax = int(ctx.params.get("nmax", min(ctx.N, 8)))
    sys = make_system(ctx.family, ctx.params, nmax + 1)
    T = QDifference(sys.weight.q) if ctx.family == "rs" else Derivative()
    out = []
    for n in range(1, nmax + 1):
        brute, closed = generalized_discriminant(sys, n, T)
        out.append(Check(f"D(phi_{n}, {T.tag}) root product vs closed form", brute.rel_diff(closed),
                         ctx.t("disc"), n=n))
        if ctx.family == "rs" and n >= 2:
            out.append(Check(f"Rogers-Szego formula n={n}", rs_disc(T.q, n).rel_diff(brute), ctx.t("disc"), n=n))
    return out


def _suite_q_disc(ctx):
    from .discriminants import (discriminant, q_discriminant, q_discriminant_alt, rs_disc, rs_disc2,
                                rs_disc3, rs_disc_q_limit)
    from .families import rs_H_coeffs, rs_system
    from .poly import ComplexPoly

    _need_family(ctx, "rs")
    q = _req(ctx.params, "q")
    nmax = int(ctx.params.get("nmax", min(ctx.N, 8)))
    sys = rs_system(q, nmax)
    out = []
    for n in range(2, nmax + 1):
        out.append(Check(f"orthonormal formula vs q-discriminant n={n}",
                         rs_disc(q, n).rel_diff(q_discriminant(sys.phi[n], q)), ctx.t("disc"), n=n))
        out.append(Check(f"H_n formula vs q-discriminant n={n}",
                         rs_disc2(q, n).rel_diff(q_discriminant(ComplexPoly(rs_H_coeffs(q, n)), q)),
                         ctx.t("disc"), n=n))
        out.append(Check(f"rearranged H_n formula n={n}", rs_disc3(q, n).rel_diff(rs_disc2(q, n)),
                         ctx.t("identity"), n=n))
    rng = ctx.rng()
    cub = ComplexPoly(rng.normal(size=4) + 1j * rng.normal(size=4))
    out.append(Check("two product forms agree (random cubic)",
                     q_discriminant(cub, q).rel_diff(q_discriminant_alt(cub, q)), ctx.t("identity")))
    one = ComplexPoly([1.0, 1.0, 1.0])
    v = q_discriminant(one, q).value
    ref = q - (1 + q) ** 2
    out.append(Check("quadratic qB^2 - (1+q)^2 AC", abs(v - ref) / abs(ref), ctx.t("identity")))
    quad = ComplexPoly(rng.normal(size=3) + 1j * rng.normal(size=3))
    out.append(Check("classical limit q -> 1 (random quadratic)",
                     q_discriminant(quad, 1 - 1e-10).rel_diff(discriminant(quad)), ctx.t("disc")))
    grid = ctx.params.get("q_grid", [0.9, 0.99, 0.999, 1 - 1e-4, 1 - 1e-5, 1 - 1e-6, 1 - 1e-7])
    for r in rs_disc_q_limit(4, grid):
        out.append(Check(f"|D(H_{r.n})| decreasing on the grid tail", 0.0 if r.decreasing_tail else 1.0, 0.0,
                         n=r.n))
        out.append(Check(f"|D(H_{r.n})| at q = {grid[-1]:.7g}", r.final_abs, ctx.t("limit"), n=r.n))
    return out


def _random_poly(rng, deg):
    from .poly import ComplexPoly
    return ComplexPoly(rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1))


def _suite_adjoint(ctx):
    from .families import closed_ladder
    from .fields import field_for, rs_qfield
    from .ladder import adjoint_residual, q_adjoint_residual

    nmax = int(ctx.params.get("nmax", 6))
    sys = make_system(ctx.family, ctx.params, nmax + 1)
    rng = ctx.rng()
    trials = int(ctx.params.get("trials", 6))
    out = []
    for n in range(1, nmax + 1):
        pair = closed_ladder(sys, n)
        worst = 0.0
        for _ in range(trials):
            f = _random_poly(rng, int(rng.integers(0, 9)))
            g = _random_poly(rng, int(rng.integers(0, 9)))
            if ctx.family == "rs":
                worst = max(worst, q_adjoint_residual(sys, pair, rs_qfield(sys.weight.q), n, f, g))
            else:
                worst = max(worst, adjoint_residual(sys, pair, field_for(sys.weight), n, f, g))
        out.append(Check(f"adjoint inner-product identity n={n}", worst, ctx.t("adjoint"), n=n))
    return out


def _suite_routes(ctx):
    from .families import system_for
    from .system import Route

    w = make_weight(ctx.family, ctx.params)
    nmax = int(ctx.params.get("nmax", min(ctx.N, 12)))
    systems = {r: system_for(w, nmax, r) for r in Route}
    out = []
    ref = systems[Route.CLOSED_FORM]
    for r in (Route.SZEGO_RECURRENCE, Route.MOMENTS):
        worst = max(_rel_poly(systems[r].phi[n], ref.phi[n]) for n in range(nmax + 1))
        out.append(Check(f"{r.value} vs closed form", worst, ctx.t("coeff")))
    worst = max(_rel_poly(systems[Route.MOMENTS].phi[n], systems[Route.SZEGO_RECURRENCE].phi[n])
                for n in range(nmax + 1))
    out.append(Check("moments vs Szego recurrence", worst, ctx.t("coeff")))
    return out


@dataclass(frozen=True)
class Suite:
    name: str
    anchor: str
    summary: str
    run: Callable
    tolerances: dict


SUITES = {s.name: s for s in [
    Suite("recurrences", "szego-recurrences",
          "Forward and reciprocal Szego recurrences, the three-term recurrence, kappa_n^2 as a sum of "
          "|phi_k(0)|^2, and the relations for the subleading coefficient l_n.",
          _suite_recurrences, {"coeff": 1e-11}),
    Suite("cd", "christoffel-darboux",
          "Direct sum of conj(phi_k(a)) phi_k(z) against its closed form at random points of the disk.",
          _suite_cd, {"cd": 1e-11}),
    Suite("ladder", "ladder-coefficients",
          "A_n, B_n from their integral representations against the family closed forms; lowering "
          "relation phi_n' = A_n phi_{n-1} - B_n phi_n and the matching raising relation.",
          _suite_ladder, {"ab": 1e-8, "lowering": 1e-9, "raising": 1e-9}),
    Suite("ode", "second-order-ode",
          "Second-order differential equation from composing the raising and lowering operators, in both "
          "elimination orders; P and Q against the family formulas.",
          _suite_ode, {"ode": 1e-7, "pq": 1e-8}),
    Suite("functional-eq", "classical-functional-equation",
          "Sum of B_n + B_{n-1} and the weighted A_{n-1} terms equals -(n-1)/z - v'(z); the integration "
          "constant and, for the modified Bessel weight, the reduction of the trailing terms to t/2.",
          _suite_functional_eq, {"fe": 1e-9}),
    Suite("q-ladder", "q-ladder-coefficients",
          "q-difference lowering relation for the Rogers-Szego polynomials, coefficientwise and at sample "
          "points, and the quadrature q-ladder against (sqrt(1-q^n)/(1-q), 0).",
          _suite_q_ladder, {"coeff": 1e-13, "ab": 1e-9}),
    Suite("q-functional-eq", "q-functional-equation",
          "Unsummed q-difference equation and summed q-functional equation for the ladder pairs; for the "
          "circular Jacobi weight, the approach of the q-identities to the classical ones as q -> 1.",
          _suite_q_functional_eq, {"fe": 1e-9, "limit": 1e-3}),
    Suite("dpii", "discrete-painleve-ii",
          "Reflection coefficients of the modified Bessel weight satisfy the discrete Painleve II "
          "recurrence; boundary-value solution agrees with the Toeplitz route.",
          _suite_dpii, {"dpii": 1e-8}),
    Suite("rn-ode", "reflection-ode",
          "RK4 integration in t of the second-order equation for r_n from its small-t series seed, and "
          "kappa_n^2 from the integral identity in t.",
          _suite_rn_ode, {"ode": 1e-6}),
    Suite("coeff-dynamics", "coefficient-dynamics",
          "t-derivatives of kappa_n, phi_n(0), r_n and phi_n(z) by central differences against the "
          "differential relations of the modified Bessel weight.",
          _suite_coeff_dynamics, {"fd": 1e-6}),
    Suite("zeros-stationarity", "zeros-electrostatics",
          "Zeros lie in the open unit disk and are stationary points of the quasi-energy T; pair sums "
          "match f''/f', the ODE holds at the zeros, and Q reconstructed away from the zeros is "
          "the family's.",
          _suite_zeros, {"coeff": 1e-10, "backward": 1e-12, "stat": 1e-7, "pair": 1e-10, "perm": 1e-13}),
    Suite("delta", "schur-product",
          "Product of phi_{n-1} over the zeros of phi_n against its closed form in kappa_j and phi_n(0), "
          "and the circular Jacobi / Szego family formulas.",
          _suite_delta, {"delta": 1e-8, "family": 1e-10}),
    Suite("gen-disc", "generalized-discriminant",
          "Resultant of phi_n with T phi_n (T = d/dz, or D_q for Rogers-Szego) by root products against "
          "the closed form through A_n at the zeros.",
          _suite_gen_disc, {"disc": 1e-8}),
    Suite("q-disc", "q-discriminant",
          "Rogers-Szego q-discriminant formulas against root products, the two product forms, the "
          "quadratic case, the classical limit, and decay of D(H_n, q) as q -> 1.",
          _suite_q_disc, {"disc": 1e-8, "identity": 1e-11, "limit": 1e-6}),
    Suite("adjoint", "ladder-adjoint",
          "(L f, g) = (f, L* g) on the unit circle for L = d/dz + B_n, or D_q + B_n for Rogers-Szego.",
          _suite_adjoint, {"adjoint": 1e-8}),
    Suite("routes", "construction-routes",
          "Closed-form, Szego-recurrence and moment-quadrature constructions agree coefficientwise.",
          _suite_routes, {"coeff": 1e-9}),
]}


def explain(name):
    s = SUITES.get(name)
    if s is None:
        raise ConfigError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    tol = ", ".join(f"{k}={v:g}" for k, v in sorted(s.tolerances.items()))
    return f"{s.name}  [{s.anchor}]\n  {s.summary}\n  default tolerances: {tol}"


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RunSpec:
    suite: str
    family: str
    params: tuple  # sorted (key, value) pairs
    N: int
    tolerances: tuple = ()

    @property
    def params_dict(self):
        return dict(self.params)

    def hash_payload(self):
        return {"suite": self.suite, "family": self.family, "params": self.params_dict, "N": self.N,
                "tolerances": dict(self.tolerances), "version": __version__,
                "grid_m": os.environ.get("OPUC_GRID_M", "")}


def _canon(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_num)


def config_hash(obj):
    return hashlib.sha256(_canon(obj).encode()).hexdigest()[:16]


def run_suite(spec: RunSpec) -> VerificationReport:
    suite = SUITES.get(spec.suite)
    if suite is None:
        raise ConfigError(f"unknown suite {spec.suite!r}; known: {', '.join(sorted(SUITES))}")
    rep = VerificationReport(spec.suite, suite.anchor, spec.family, spec.params_dict, spec.N,
                             config_hash=config_hash(spec.hash_payload()))
    ctx = _Ctx(spec.suite, spec.family, spec.params_dict, spec.N, dict(spec.tolerances), suite.tolerances)
    t0 = time.perf_counter()
    try:
        with np.errstate(all="ignore"):
            rep.checks = suite.run(ctx)
    except OPUCError as exc:
        rep.error = {"type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
    except (ValueError, ZeroDivisionError, OverflowError, IndexError, KeyError) as exc:
        # bad parameters that slipped past validation count as domain errors
        rep.error = {"type": type(exc).__name__, "message": str(exc), "exit_code": 1}
    rep.runtime_ms = int(round((time.perf_counter() - t0) * 1000))
    return rep


def run_config(specs, jobs=1):
    if jobs > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(run_suite, specs))
    return [run_suite(s) for s in specs]


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

DEFAULT_CONFIG = {"run": [
    {"suite": "recurrences", "family": "random", "N": 30, "params": {"seed": [0, 1, 2], "rmax": 0.9}},
    {"suite": "recurrences", "family": "cj", "N": 20, "params": {"a": 1.0}},
    {"suite": "routes", "family": "cj", "N": 12, "params": {"a": [0.5, 1.0, 2.5]}},
    {"suite": "routes", "family": "sz", "N": 12, "params": {"a": 1.0, "b": 0.5}},
    {"suite": "routes", "family": "sz", "N": 12, "params": {"a": 0.5, "b": 0.5}},
    {"suite": "routes", "family": "mb", "N": 12, "params": {"t": [0.5, 1.0, 2.0]}},
    {"suite": "routes", "family": "rs", "N": 12, "params": {"q": [0.2, 0.5, 0.8]}},
    {"suite": "cd", "family": "random", "N": 12, "params": {"seed": 7}},
    {"suite": "cd", "family": "cj", "N": 12, "params": {"a": 1.0, "seed": 3}},
    {"suite": "ladder", "family": "cj", "N": 8, "params": {"a": [1.0, 2.5]}},
    {"suite": "ladder", "family": "sz", "N": 8, "params": {"a": 1.0, "b": 0.5}},
    {"suite": "ladder", "family": "mb", "N": 8, "params": {"t": [1.0, 2.0]}},
    {"suite": "ode", "family": "cj", "N": 8, "params": {"a": 1.0}},
    {"suite": "ode", "family": "sz", "N": 8, "params": {"a": 1.0, "b": 0.5}},
    {"suite": "ode", "family": "mb", "N": 8, "params": {"t": 1.0}},
    {"suite": "functional-eq", "family": "cj", "N": 8, "params": {"a": 1.0}},
    {"suite": "functional-eq", "family": "sz", "N": 8, "params": {"a": 1.0, "b": 0.5}},
    {"suite": "functional-eq", "family": "mb", "N": 8, "params": {"t": 1.0}},
    {"suite": "dpii", "family": "mb", "N": 10, "params": {"t": [0.5, 1.0, 2.0]}},
    {"suite": "rn-ode", "family": "mb", "N": 7, "params": {"t": 1.0, "n": 5}},
    {"suite": "coeff-dynamics", "family": "mb", "N": 6, "params": {"t": 1.0}},
    {"suite": "q-ladder", "family": "rs", "N": 10, "params": {"q": [0.2, 0.5, 0.8]}},
    {"suite": "q-functional-eq", "family": "rs", "N": 6, "params": {"q": [0.2, 0.5, 0.8]}},
    {"suite": "q-functional-eq", "family": "cj", "N": 6, "params": {"a": 1.0, "q": 0.9999}},
    {"suite": "zeros-stationarity", "family": "cj", "N": 15, "params": {"a": 1.0}},
    {"suite": "zeros-stationarity", "family": "sz", "N": 15, "params": {"a": 1.0, "b": 0.5}},
    {"suite": "zeros-stationarity", "family": "mb", "N": 15, "params": {"t": 1.0, "stat_nmax": 10}},
    {"suite": "zeros-stationarity", "family": "rs", "N": 15, "params": {"q": [0.2, 0.5, 0.8]}},
    {"suite": "zeros-stationarity", "family": "random", "N": 15, "params": {"seed": 11, "rmax": 0.9}},
    {"suite": "zeros-stationarity", "family": "lebesgue", "N": 15, "params": {}},
    {"suite": "delta", "family": "cj", "N": 10, "params": {"a": [1.0, 2.5]}},
    {"suite": "delta", "family": "sz", "N": 10, "params": {"a": 1.0, "b": 0.5}},
    {"suite": "delta", "family": "mb", "N": 10, "params": {"t": [0.5, 1.0, 2.0]}},
    {"suite": "delta", "family": "rs", "N": 10, "params": {"q": [0.2, 0.5, 0.8]}},
    {"suite": "delta", "family": "random", "N": 10, "params": {"seed": 5, "rmax": 0.9}},
    {"suite": "gen-disc", "family": "cj", "N": 8, "params": {"a": 1.0}},
    {"suite": "gen-disc", "family": "rs", "N": 8, "params": {"q": [0.2, 0.5, 0.8]}},
    {"suite": "q-disc", "family": "rs", "N": 8, "params": {"q": [0.2, 0.5, 0.8]}},
    {"suite": "adjoint", "family": "cj", "N": 8, "params": {"a": 1.0}},
    {"suite": "adjoint", "family": "sz", "N": 8, "params": {"a": 1.0, "b": 0.5}},
    {"suite": "adjoint", "family": "mb", "N": 8, "params": {"t": 1.0}},
    {"suite": "adjoint", "family": "rs", "N": 8, "params": {"q": 0.5}},
]}

_ENTRY_KEYS = {"suite", "family", "N", "params", "tolerances"}


def parse_config_text(text, fmt):
    """Parse TOML or JSON; errors carry the line/column of the problem."""
    if fmt == "json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        import tomllib
    except ImportError:  # Python < 3.11
        import tomli as tomllib
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from None


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    fmt = "json" if str(path).lower().endswith(".json") else "toml"
    return parse_config_text(text, fmt)


def expand_config(cfg):
    """List of RunSpec; list-valued parameters expand into their product, in key order."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a table/object")
    entries = cfg.get("run", [])
    if not isinstance(entries, list):
        raise ConfigError("'run' must be a list of suite entries")
    specs = []
    for i, e in enumerate(entries):
        if not isinstance(e, dict):
            raise ConfigError(f"run[{i}] must be a table")
        extra = set(e) - _ENTRY_KEYS
        if extra:
            raise ConfigError(f"run[{i}]: unknown keys {sorted(extra)}")
        if "suite" not in e or "family" not in e:
            raise ConfigError(f"run[{i}] needs 'suite' and 'family'")
        if e["suite"] not in SUITES:
            raise ConfigError(f"run[{i}]: unknown suite {e['suite']!r}")
        params = e.get("params", {})
        tols = e.get("tolerances", {})
        if not isinstance(params, dict) or not isinstance(tols, dict):
            raise ConfigError(f"run[{i}]: 'params' and 'tolerances' must be tables")
        try:
            N = int(e.get("N", 12))
        except (TypeError, ValueError):
            raise ConfigError(f"run[{i}]: N must be an integer") from None
        keys = sorted(params)
        grids = [params[k] if isinstance(params[k], list) else [params[k]] for k in keys]
        for combo in _product(grids):
            specs.append(RunSpec(e["suite"], str(e["family"]), tuple(zip(keys, combo)), N,
                                 tuple(sorted(tols.items()))))
    return specs


def _product(grids):
    out = [()]
    for g in grids:
        out = [o + (v,) for o in out for v in g]
    return out


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def aggregate(reports, cfg_hash=""):
    d = {"schema": SCHEMA, "version": __version__, "config_hash": cfg_hash,
         "reports": [r.to_dict() for r in reports],
         "summary": {"suites": len({r.suite for r in reports}), "runs": len(reports),
                     "passed": sum(r.passed for r in reports),
                     "failed": sum(not r.passed for r in reports)},
         "runtime_ms": sum(r.runtime_ms for r in reports)}
    return d


def _strip_runtime(d):
    d = dict(d)
    d.pop("runtime_ms", None)
    if "reports" in d:
        d["reports"] = [{k: v for k, v in r.items() if k != "runtime_ms"} for r in d["reports"]]
    return d


def aggregate_json(agg):
    return json.dumps(agg, sort_keys=True, indent=1, default=_num) + "\n"


def determinism_hash(agg):
    return hashlib.sha256(_canon(_strip_runtime(agg)).encode()).hexdigest()


def _fmt_params(params):
    return ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in sorted(params.items()))


def summary_table(reports):
    rows = [("suite", "family", "params", "checks", "worst residual", "tolerance", "status")]
    for r in reports:
        w = r.worst()
        status = "PASS" if r.passed else ("ERROR " + r.error["type"] if r.error else "FAIL")
        rows.append((r.suite, r.family, _fmt_params(r.params), str(len(r.checks)),
                     f"{w.residual:.2e}" if w else "-", f"{w.tolerance:.0e}" if w else "-", status))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(wd) for c, wd in zip(row, widths)).rstrip() for row in rows)


def _slug(r):
    p = _fmt_params(r.params).replace(",", "_").replace("=", "")
    return f"{r.suite}_{r.family}" + (f"_{p}" if p else "")


def write_plot_data(reports, directory):
    """Gnuplot-ready files: one per run, columns n residual tolerance, blank line between checks."""
    written = []
    for r in reports:
        series = {}
        for c in r.checks:
            if c.n is None:
                continue
            key = c.name.rsplit(" n=", 1)[0] if " n=" in c.name else c.name
            series.setdefault(key, []).append(c)
        if not series:
            continue
        lines = [f"# {r.suite} {r.family} {_fmt_params(r.params)}", "# n residual tolerance"]
        for key in series:
            lines.append(f"# {key}")
            lines += [f"{c.n} {c.residual:.6e} {c.tolerance:.6e}" for c in series[key]]
            lines += ["", ""]
        path = os.path.join(directory, _slug(r) + ".dat")
        atomic_write_text(path, "\n".join(lines))
        written.append(path)
    return written


def write_checks_csv(reports, path):
    rows = []
    for r in reports:
        for c in r.checks:
            rows.append([r.suite, r.family, _fmt_params(r.params), c.name, "" if c.n is None else c.n,
                         repr(float(c.residual)), repr(float(c.tolerance)), int(c.passed)])
    write_csv(path, ("suite", "family", "params", "check", "n", "residual", "tolerance", "pass"), rows)
