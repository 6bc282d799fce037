"""Numba switch for the hot kernels.

Set ``OPUC_NUMBA=0`` in the environment to run every kernel as plain
Python/numpy. The flag is read once, at import time.
"""
import os

_FLAG = os.environ.get("OPUC_NUMBA", "1").strip().lower()

try:
    if _FLAG in ("0", "false", "no", "off"):
        raise ImportError("numba disabled by OPUC_NUMBA")
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def njit(func):
    """Compile ``func`` with numba when enabled, else return it untouched."""
    if HAS_NUMBA:
        return _njit(cache=True)(func)
    return func


def backend():
    return "numba" if HAS_NUMBA else "numpy"
