"""Time each hot kernel as compiled loops (numba) against the numpy version.

    python benchmarks/bench_kernels.py [--repeat 5]

With OPUC_NUMBA=0 the "loop" column times the uncompiled Python loops.
"""
import argparse
import time

import numpy as np

from opuc import kernels
from opuc._jit import backend
from opuc.mbessel import mb_rn_seed


def _cases(rng):
    deg = 40
    coeffs = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
    zs = 0.9 * np.exp(2j * np.pi * rng.random(20000))
    r = 0.7 * rng.random(200) * np.exp(2j * np.pi * rng.random(200))
    kappa = np.cumprod(1 / np.sqrt(1 - np.abs(r) ** 2))
    phi0 = np.concatenate([[1.0 + 0j], r * kappa])
    z0 = 1.1 * np.exp(2j * np.pi * (np.arange(deg) + 0.25) / deg)
    m = 20000
    lower = rng.random(m - 1)
    upper = rng.random(m - 1)
    diag = 4.0 + rng.random(m)
    rhs = rng.random(m)
    r0, rp0 = mb_rn_seed(5, 1e-2)
    return {
        "horner": (coeffs, zs),
        "horner_deriv": (coeffs, zs),
        "szego_build": (phi0, 1.0),
        "aberth": (coeffs, z0, 500, 1e-14),
        "rk4_reflection": (5, 1e-2, r0, rp0, 2.0, 20000, 1e-10),
        "tridiag_solve": (lower, diag, upper, rhs),
    }


def _best(fn, args, repeat):
    fn(*args)  # compile / warm up
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def _first(out):
    return out[0] if isinstance(out, tuple) else out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    cases = _cases(np.random.default_rng(args.seed))
    print(f"backend: {backend()}")
    print(f"{'kernel':<16}{'loop [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for name, kargs in cases.items():
        loop, vec = kernels.implementations(name)
        t_loop = _best(loop, kargs, args.repeat)
        t_vec = _best(vec, kargs, args.repeat)
        a = np.asarray(_first(loop(*kargs)))
        b = np.asarray(_first(vec(*kargs)))
        diff = float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
        print(f"{name:<16}{1e3 * t_loop:>12.3f}{1e3 * t_vec:>12.3f}{t_vec / t_loop:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
