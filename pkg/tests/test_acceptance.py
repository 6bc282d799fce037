"""Acceptance gate: the thirteen criteria at their stated tolerances.

Each criterion is a list of suite runs with its tolerances pinned here, so a
change of suite defaults cannot loosen the gate. One PASS/FAIL line is printed
per criterion. Run directly with ``python tests/test_acceptance.py`` or via
pytest.
"""
import json
import sys
import time

import pytest

from opuc.report import (DEFAULT_CONFIG, RunSpec, _strip_runtime, aggregate, aggregate_json, config_hash,
                         determinism_hash, expand_config, run_config, run_suite)


def _spec(suite, family, N, tol, **params):
    return RunSpec(suite, family, tuple(sorted(params.items())), N, tuple(sorted(tol.items())))


def _grid(suite, family, N, tol, key, values, **fixed):
    return [_spec(suite, family, N, tol, **{key: v}, **fixed) for v in values]


CJ_A = [0.5, 1.0, 2.5]
SZ_AB = [(1.0, 0.5), (0.5, 0.5)]
MB_T = [0.5, 1.0, 2.0]
RS_Q = [0.2, 0.5, 0.8]

CRITERIA = {
    1: ("recurrences on random reflection systems, N = 30, < 1e-11",
        [_spec("recurrences", "random", 30, {"coeff": 1e-11}, seed=s, rmax=0.9) for s in range(3)]),
    2: ("closed / recurrence / moment routes agree to 1e-9, n <= 12",
        _grid("routes", "cj", 12, {"coeff": 1e-9}, "a", CJ_A)
        + [_spec("routes", "sz", 12, {"coeff": 1e-9}, a=a, b=b) for a, b in SZ_AB]
        + _grid("routes", "mb", 12, {"coeff": 1e-9}, "t", MB_T)
        + _grid("routes", "rs", 12, {"coeff": 1e-9}, "q", RS_Q)),
    3: ("Christoffel-Darboux at 32 random pairs, n <= 12, < 1e-11",
        [_spec("cd", "random", 12, {"cd": 1e-11}, seed=7, pairs=32),
         _spec("cd", "cj", 12, {"cd": 1e-11}, a=1.0, seed=3, pairs=32)]),
    4: ("quadrature ladder vs closed forms 1e-8; lowering and raising < 1e-9",
        _grid("ladder", "cj", 8, {"ab": 1e-8, "lowering": 1e-9, "raising": 1e-9}, "a", CJ_A)
        + [_spec("ladder", "sz", 8, {"ab": 1e-8, "lowering": 1e-9, "raising": 1e-9}, a=1.0, b=0.5)]
        + _grid("ladder", "mb", 8, {"ab": 1e-8, "lowering": 1e-9, "raising": 1e-9}, "t", [1.0, 2.0])),
    5: ("second-order ODE < 1e-7; family P, Q to 1e-8",
        [_spec("ode", "cj", 8, {"ode": 1e-7, "pq": 1e-8}, a=1.0),
         _spec("ode", "sz", 8, {"ode": 1e-7, "pq": 1e-8}, a=1.0, b=0.5),
         _spec("ode", "mb", 8, {"ode": 1e-7, "pq": 1e-8}, t=1.0)]),
    6: ("functional equation, t/2 reduction and integration constant < 1e-9, 2 <= n <= 8",
        [_spec("functional-eq", "cj", 8, {"fe": 1e-9}, a=1.0),
         _spec("functional-eq", "sz", 8, {"fe": 1e-9}, a=1.0, b=0.5)]
        + _grid("functional-eq", "mb", 8, {"fe": 1e-9}, "t", [1.0, 2.0])),
    7: ("reflection recurrence < 1e-8 and boundary-value route vs Toeplitz to 1e-8, n <= 10",
        _grid("dpii", "mb", 10, {"dpii": 1e-8}, "t", MB_T)),
    8: ("coefficient dynamics < 1e-6; RK4 r_5(1); quadrature kappa_n^2 to 1e-6",
        [_spec("coeff-dynamics", "mb", 6, {"fd": 1e-6}, t=1.0),
         _spec("rn-ode", "mb", 7, {"ode": 1e-6}, t=1.0, n=5)]),
    9: ("q-lowering coefficientwise < 1e-13; q-ladder 1e-9; q-equations < 1e-9, n <= 6",
        _grid("q-ladder", "rs", 10, {"coeff": 1e-13, "ab": 1e-9}, "q", RS_Q)
        + _grid("q-functional-eq", "rs", 6, {"fe": 1e-9}, "q", RS_Q)),
    10: ("zeros inside the disk for n <= 15; stationarity and constant Q < 1e-7",
         [_spec("zeros-stationarity", "cj", 15, {"stat": 1e-7}, a=a) for a in CJ_A]
         + [_spec("zeros-stationarity", "sz", 15, {"stat": 1e-7}, a=a, b=b) for a, b in SZ_AB if a != b]
         + [_spec("zeros-stationarity", "mb", 15, {"stat": 1e-7}, t=t, stat_nmax=10) for t in MB_T]
         + _grid("zeros-stationarity", "rs", 15, {}, "q", RS_Q)
         + [_spec("zeros-stationarity", "random", 15, {}, seed=11, rmax=0.9),
            _spec("zeros-stationarity", "lebesgue", 15, {})]
         + [_spec("zeros-stationarity", "sz", 15, {}, a=0.5, b=0.5, stat_nmax=0)]),
    11: ("discriminants: Delta_n 1e-8, family forms 1e-10, generalized 1e-8, q-forms 1e-8, q -> 1 decay",
         _grid("delta", "cj", 10, {"delta": 1e-8, "family": 1e-10}, "a", CJ_A)
         + [_spec("delta", "sz", 10, {"delta": 1e-8, "family": 1e-10}, a=1.0, b=0.5)]
         + _grid("delta", "mb", 10, {"delta": 1e-8}, "t", MB_T)
         + _grid("delta", "rs", 10, {"delta": 1e-8}, "q", RS_Q)
         + [_spec("delta", "random", 10, {"delta": 1e-8}, seed=5, rmax=0.9)]
         + [_spec("gen-disc", "cj", 8, {"disc": 1e-8}, a=1.0)]
         + _grid("gen-disc", "rs", 8, {"disc": 1e-8}, "q", RS_Q)
         + _grid("q-disc", "rs", 8, {"disc": 1e-8, "identity": 1e-11, "limit": 1e-6}, "q", RS_Q)),
    12: ("adjoint identities < 1e-8 for random polynomials of degree <= 8",
         [_spec("adjoint", "cj", 8, {"adjoint": 1e-8}, a=1.0),
          _spec("adjoint", "sz", 8, {"adjoint": 1e-8}, a=1.0, b=0.5),
          _spec("adjoint", "mb", 8, {"adjoint": 1e-8}, t=1.0)]
         + _grid("adjoint", "rs", 8, {"adjoint": 1e-8}, "q", RS_Q)),
}


def _evaluate(specs):
    reports = [run_suite(s) for s in specs]
    bad = []
    worst = 0.0
    for r in reports:
        if r.error:
            bad.append(f"{r.suite}/{r.family} {r.params}: {r.error['type']}")
        for c in r.checks:
            if c.tolerance > 0:
                worst = max(worst, c.residual / c.tolerance)
            if not c.passed:
                bad.append(f"{r.suite}/{r.family} {r.params}: {c.name} {c.residual:.3e} > {c.tolerance:.0e}")
    return not bad, worst, sum(len(r.checks) for r in reports), bad


def _determinism():
    specs = expand_config(DEFAULT_CONFIG)
    h = config_hash([s.hash_payload() for s in specs])
    a = aggregate(run_config(specs), h)
    b = aggregate(run_config(specs), h)
    same_bytes = aggregate_json(_strip_runtime(a)) == aggregate_json(_strip_runtime(b))
    ok = same_bytes and determinism_hash(a) == determinism_hash(b)
    return ok, a["summary"]


def _line(k, ok, text):
    return f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {text}"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    desc, specs = CRITERIA[k]
    ok, worst, nchecks, bad = _evaluate(specs)
    with capsys.disabled():
        print("\n" + _line(k, ok, f"{desc}  [{nchecks} checks, worst residual/tol {worst:.2e}]"))
    assert ok, "\n".join(bad[:20])


def test_criterion_13_determinism(capsys):
    ok, summary = _determinism()
    with capsys.disabled():
        print("\n" + _line(13, ok, f"two default-config runs identical modulo runtime "
                                   f"[{summary['runs']} runs, {summary['passed']} passed]"))
    assert ok


if __name__ == "__main__":
    t0 = time.perf_counter()
    failed = 0
    for k in sorted(CRITERIA):
        desc, specs = CRITERIA[k]
        ok, worst, nchecks, bad = _evaluate(specs)
        failed += not ok
        print(_line(k, ok, f"{desc}  [{nchecks} checks, worst residual/tol {worst:.2e}]"))
        for b in bad[:5]:
            print("      " + b)
    ok, summary = _determinism()
    failed += not ok
    print(_line(13, ok, f"two default-config runs identical modulo runtime [{json.dumps(summary)}]"))
    print(f"{13 - failed}/13 criteria pass in {time.perf_counter() - t0:.1f} s")
    sys.exit(1 if failed else 0)
