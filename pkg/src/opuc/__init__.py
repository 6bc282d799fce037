"""Orthogonal polynomials on the unit circle: construction routes, ladder
operators, zeros and discriminants, with residual-based verification."""

__version__ = "0.1.0"

from .errors import OPUCError  # noqa: E402
from .poly import ComplexPoly  # noqa: E402
from .system import OPUCSystem, Route, build_from_phi0, build_from_reflections  # noqa: E402
from .families import (cj_system, sz_system, rs_system, closed_ladder, closed_system,  # noqa: E402
                       moment_system, recurrence_system, system_for)
from .ladder import ladder_numeric, q_ladder_numeric  # noqa: E402
from .zeros import roots, assert_in_disk  # noqa: E402
from .discriminants import discriminant, delta, q_discriminant, generalized_discriminant  # noqa: E402

__all__ = [
    "__version__", "OPUCError", "ComplexPoly", "OPUCSystem", "Route", "build_from_phi0",
    "build_from_reflections", "cj_system", "sz_system", "rs_system", "closed_ladder", "closed_system",
    "moment_system", "recurrence_system", "system_for", "ladder_numeric", "q_ladder_numeric",
    "roots", "assert_in_disk", "discriminant", "delta", "q_discriminant", "generalized_discriminant",
]
