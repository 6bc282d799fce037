"""Command-line entry point.

Exit codes: 0 pass, 1 domain error, 2 numerical error or failed check,
3 IO/config error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from ._jit import backend
from ._io import atomic_write_text
from .errors import ConfigError, OPUCError
from .report import (DEFAULT_CONFIG, SUITES, RunSpec, aggregate, aggregate_json, config_hash, expand_config,
                     determinism_hash, explain, load_config, make_system, run_config, run_suite, summary_table,
                     write_checks_csv, write_plot_data)

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
FAMILIES = ("lebesgue", "cj", "sz", "mb", "rs", "random")
ROUTES = {"closed": "ClosedForm", "recurrence": "SzegoRecurrence", "moments": "Moments"}


def _family_args(p, n_default=8):
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--seed", type=int, help="seed for the random reflection family")
    p.add_argument("--n", type=int, default=n_default, dest="N", help="largest degree")


def _params(args):
    return {k: getattr(args, k) for k in ("a", "b", "t", "q", "seed") if getattr(args, k, None) is not None}


def _parse_tols(items):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            key, val = "*", item
        try:
            out[key] = float(val)
        except ValueError:
            raise ConfigError(f"bad tolerance {item!r}; use NAME=VALUE or VALUE") from None
    return out


def build_parser():
    ap = argparse.ArgumentParser(prog="opuc", description="Orthogonal polynomials on the unit circle: "
                                 "construction, ladder identities, zeros and discriminants.")
    ap.add_argument("--version", action="version", version=f"opuc {__version__} ({backend()} kernels)")
    ap.add_argument("--explain", metavar="SUITE", help="describe what a verification suite checks")
    sub = ap.add_subparsers(dest="cmd")

    b = sub.add_parser("build", help="build phi_0..phi_N and print kappa, phi(0), l")
    _family_args(b)
    b.add_argument("--route", choices=sorted(ROUTES), default="closed")
    b.add_argument("--out", help="write the system as JSON")

    v = sub.add_parser("verify", help="run one verification suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    _family_args(v, n_default=12)
    v.add_argument("--nmax", type=int, help="largest n checked (defaults per suite)")
    v.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")
    v.add_argument("--out", help="write the report JSON here")

    r = sub.add_parser("report-all", help="run every suite listed in a config")
    r.add_argument("config", nargs="?", help="TOML or JSON config (default: built-in acceptance config)")
    r.add_argument("--out", help="aggregate report JSON")
    r.add_argument("--csv", help="CSV table of all checks")
    r.add_argument("--plot-dir", help="gnuplot-ready residual-vs-n data files")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--dump-default-config", action="store_true", help="print the built-in config as JSON")

    z = sub.add_parser("roots", help="zeros of phi_n")
    _family_args(z)
    z.add_argument("--csv", help="write re, im, abs, residual")

    d = sub.add_parser("disc-table", help="discriminant table (root products vs closed forms)")
    _family_args(d)
    d.add_argument("--out", help="CSV file")
    return ap


def cmd_build(args):
    route = ROUTES[args.route]
    sys_ = make_system(args.family, {**_params(args), "route": route}, args.N, route)
    print(f"# {args.family} {json.dumps(_params(args), sort_keys=True)} route={route} N={sys_.N}")
    print(f"{'n':>3} {'kappa_n':>22} {'Re phi_n(0)':>22} {'Im phi_n(0)':>22} {'Re l_n':>22} {'Im l_n':>22}")
    for n in range(sys_.N + 1):
        p0, l = complex(sys_.phi0[n]), complex(sys_.ell[n])
        print(f"{n:>3} {sys_.kappa[n]:>22.15e} {p0.real:>22.15e} {p0.imag:>22.15e} {l.real:>22.15e} {l.imag:>22.15e}")
    if args.out:
        atomic_write_text(args.out, json.dumps(sys_.to_json_dict(), sort_keys=True, indent=1) + "\n")
    return EXIT_OK


def cmd_verify(args):
    params = _params(args)
    if args.nmax is not None:
        params["nmax"] = args.nmax
    spec = RunSpec(args.suite, args.family, tuple(sorted(params.items())), args.N,
                   tuple(sorted(_parse_tols(args.tol).items())))
    rep = run_suite(spec)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<55} residual {c.residual:.3e}  tol {c.tolerance:.0e}")
    if rep.error:
        print(f"ERROR {rep.error['type']}: {rep.error['message']}", file=sys.stderr)
    if args.out:
        atomic_write_text(args.out, json.dumps(rep.to_dict(), sort_keys=True, indent=1) + "\n")
    return rep.exit_code


def cmd_report_all(args):
    if args.dump_default_config:
        print(json.dumps(DEFAULT_CONFIG, indent=1))
        return EXIT_OK
    cfg = load_config(args.config) if args.config else DEFAULT_CONFIG
    specs = expand_config(cfg)
    reports = run_config(specs, jobs=max(1, args.jobs))
    agg = aggregate(reports, config_hash([s.hash_payload() for s in specs]))
    if reports:
        print(summary_table(reports))
    s = agg["summary"]
    print(f"{s['runs']} runs over {s['suites']} suites: {s['passed']} passed, {s['failed']} failed")
    print(f"determinism hash {determinism_hash(agg)}")
    if args.out:
        atomic_write_text(args.out, aggregate_json(agg))
    if args.csv:
        write_checks_csv(reports, args.csv)
    if args.plot_dir:
        write_plot_data(reports, args.plot_dir)
    codes = [r.exit_code for r in reports if r.exit_code]
    return codes[0] if codes else EXIT_OK


def cmd_roots(args):
    from .zeros import assert_in_disk, roots, roots_to_csv

    sys_ = make_system(args.family, _params(args), args.N)
    rs = roots(sys_.phi[args.N])
    for z, r in zip(rs.roots, rs.residuals):
        print(f"{z.real:+.16e} {z.imag:+.16e}  |z|={abs(z):.16f}  residual={r:.2e}")
    print(f"inside the unit disk: {assert_in_disk(rs)}")
    if args.csv:
        roots_to_csv(rs, args.csv)
    return EXIT_OK


def cmd_disc_table(args):
    from .discriminants import (Derivative, QDifference, cj_delta, delta, disc_table_rows,
                                generalized_discriminant, sz_delta, write_disc_table)

    sys_ = make_system(args.family, _params(args), args.N)
    pairs = []
    for n in range(1, args.N + 1):
        brute, closed = delta(sys_, n)
        pairs += [(brute, closed), (closed, closed)]
        if args.family == "cj":
            pairs.append((cj_delta(args.a, n), closed))
        elif args.family == "sz":
            pairs.append((sz_delta(args.a, args.b, n), closed))
        if args.family in ("cj", "sz", "rs") and n < args.N:
            T = QDifference(args.q) if args.family == "rs" else Derivative()
            gb, gc = generalized_discriminant(sys_, n, T)
            pairs += [(gb, gc), (gc, gc)]
    for row in disc_table_rows(pairs):
        print(",".join(str(x) for x in row))
    if args.out:
        write_disc_table(args.out, pairs)
    return EXIT_OK


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "report-all": cmd_report_all,
            "roots": cmd_roots, "disc-table": cmd_disc_table}


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.explain:
            print(explain(args.explain))
            return EXIT_OK
        if not args.cmd:
            ap.print_help()
            return EXIT_OK
        return COMMANDS[args.cmd](args)
    except OPUCError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
