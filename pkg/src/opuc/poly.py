"""Dense complex polynomials in the monomial basis."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, ZeroLeadingCoefficient

__all__ = [
    "ComplexPoly",
    "QReal",
    "as_qreal",
    "eval_poly",
    "reciprocal",
    "derivative",
    "q_difference",
]


class ComplexPoly:
    """Polynomial ``a_0 + a_1 z + ... + a_n z^n`` with complex coefficients.

    The degree is the index of the last stored coefficient. A zero trailing
    coefficient is allowed (a *nominal* degree) but :meth:`reciprocal`
    refuses it. Instances are immutable.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=np.complex128, ndmin=1).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        c.setflags(write=False)
        self._c = c

    @classmethod
    def monomial(cls, n, scale=1.0):
        c = np.zeros(n + 1, dtype=np.complex128)
        c[n] = scale
        return cls(c)

    @classmethod
    def constant(cls, value):
        return cls([value])

    @property
    def coeffs(self):
        return self._c

    @property
    def degree(self):
        return self._c.size - 1

    @property
    def leading(self):
        return self._c[-1]

    def __len__(self):
        return self._c.size

    def __repr__(self):
        return f"ComplexPoly({self._c.tolist()!r})"

    def __eq__(self, other):
        if not isinstance(other, ComplexPoly):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    __hash__ = None

    def __call__(self, z):
        z_arr = np.asarray(z, dtype=np.complex128)
        if z_arr.ndim == 0:
            return complex(kernels.horner(self._c, z_arr.reshape(1))[0])
        return kernels.horner(self._c, z_arr.ravel()).reshape(z_arr.shape)

    def eval_with_derivatives(self, z):
        """Return ``p(z), p'(z), p''(z)`` at an array of points."""
        z_arr = np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel()
        return kernels.horner_deriv(self._c, z_arr)

    # arithmetic ---------------------------------------------------------
    def _binary(self, other, op):
        if isinstance(other, ComplexPoly):
            n = max(self._c.size, other._c.size)
            a = np.zeros(n, dtype=np.complex128)
            b = np.zeros(n, dtype=np.complex128)
            a[: self._c.size] = self._c
            b[: other._c.size] = other._c
            return ComplexPoly(op(a, b))
        c = self._c.copy()
        c[0] = op(c[0], complex(other))
        return ComplexPoly(c)

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return ComplexPoly(-self._c)

    def __mul__(self, other):
        if isinstance(other, ComplexPoly):
            return ComplexPoly(np.convolve(self._c, other._c))
        return ComplexPoly(self._c * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return ComplexPoly(self._c / complex(scalar))

    def shift(self, k=1):
        """Multiply by ``z**k``."""
        return ComplexPoly(np.concatenate([np.zeros(k, dtype=np.complex128), self._c]))

    def scale_argument(self, s):
        """Return ``p(s z)``."""
        return ComplexPoly(self._c * complex(s) ** np.arange(self._c.size))

    def conj_coeffs(self):
        return ComplexPoly(np.conj(self._c))

    def padded(self, n):
        """Coefficients zero-padded (never truncated) to length ``n + 1``."""
        out = np.zeros(max(n + 1, self._c.size), dtype=np.complex128)
        out[: self._c.size] = self._c
        return out

    def trimmed(self, tol=0.0):
        c = self._c
        k = c.size
        while k > 1 and abs(c[k - 1]) <= tol:
            k -= 1
        return ComplexPoly(c[:k])

    # calculus and the reciprocal -----------------------------------------
    def derivative(self):
        if self._c.size == 1:
            return ComplexPoly([0.0])
        return ComplexPoly(self._c[1:] * np.arange(1, self._c.size))

    def reciprocal(self):
        if self._c[-1] == 0:
            raise ZeroLeadingCoefficient("reciprocal needs a nonzero leading coefficient")
        return ComplexPoly(np.conj(self._c[::-1]))

    def q_difference(self, q):
        q = as_qreal(q)
        if self._c.size == 1:
            return ComplexPoly([0.0])
        k = np.arange(1, self._c.size)
        # [k]_q = (1 - q^k)/(1 - q), built as a finite geometric sum
        qk = np.array([np.sum(q.q ** np.arange(j)) for j in k])
        return ComplexPoly(self._c[1:] * qk)

    def max_abs(self):
        return float(np.max(np.abs(self._c)))


@dataclass(frozen=True)
class QReal:
    """A base ``0 < q < 1`` together with its positive square root."""

    q: float
    sqrt_q: float

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise DomainError(f"q must lie in (0, 1), got {self.q!r}")

    @classmethod
    def of(cls, q):
        q = float(q)
        if not (0.0 < q < 1.0):
            raise DomainError(f"q must lie in (0, 1), got {q!r}")
        return cls(q, float(np.sqrt(q)))


def as_qreal(q):
    return q if isinstance(q, QReal) else QReal.of(q)


def eval_poly(p: ComplexPoly, z):
    return p(z)


def reciprocal(p: ComplexPoly) -> ComplexPoly:
    return p.reciprocal()


def derivative(p: ComplexPoly) -> ComplexPoly:
    return p.derivative()


def q_difference(p: ComplexPoly, q) -> ComplexPoly:
    return p.q_difference(q)
