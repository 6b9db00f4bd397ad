"""Exact arithmetic in the definite quaternion algebra ramified at a prime N.

Elements are stored against the fixed basis ``{1, i, J, K}`` with ``J = sqrt(N) j``
and ``K = sqrt(N) k``, so ``i^2 = -1``, ``J^2 = K^2 = -N`` and ``iJ = K``.  The
reduced norm is the diagonal form ``a^2 + b^2 + N c^2 + N d^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import sympy


class ParameterError(ValueError):
    """Raised for an unsupported level."""


@dataclass(frozen=True)
class AlgebraParams:
    level: int

    def __post_init__(self) -> None:
        n = self.level
        if not isinstance(n, int) or isinstance(n, bool):
            raise ParameterError(f"level must be an int, got {n!r}")
        if n < 11:
            raise ParameterError(f"level {n} is below 11")
        if not sympy.isprime(n):
            raise ParameterError(f"level {n} is not prime")
        if n % 4 != 3:
            raise ParameterError(f"level {n} is not 3 mod 4")


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Quaternion:
    """An element ``a + b i + c J + d K`` of H_N with rational coefficients."""

    coeffs: tuple[Fraction, Fraction, Fraction, Fraction]
    level: int

    def __init__(self, coeffs: Iterable, level: int):
        c = tuple(_frac(x) for x in coeffs)
        if len(c) != 4:
            raise ValueError("a quaternion has exactly four coefficients")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "level", level)

    @classmethod
    def scalar(cls, x, level: int) -> Quaternion:
        return cls((x, 0, 0, 0), level)

    def _check(self, other: Quaternion) -> None:
        if self.level != other.level:
            raise ValueError("quaternions from different algebras")

    def __add__(self, other):
        if not isinstance(other, Quaternion):
            other = Quaternion.scalar(other, self.level)
        self._check(other)
        return Quaternion((x + y for x, y in zip(self.coeffs, other.coeffs)), self.level)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion((-x for x in self.coeffs), self.level)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Quaternion):
            s = _frac(other)
            return Quaternion((s * x for x in self.coeffs), self.level)
        return multiply(self, other)

    def __rmul__(self, other):
        s = _frac(other)
        return Quaternion((s * x for x in self.coeffs), self.level)

    def __truediv__(self, other):
        if isinstance(other, Quaternion):
            return self * other.inverse()
        s = _frac(other)
        return Quaternion((x / s for x in self.coeffs), self.level)

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def conjugate(self) -> Quaternion:
        a, b, c, d = self.coeffs
        return Quaternion((a, -b, -c, -d), self.level)

    def norm(self) -> Fraction:
        a, b, c, d = self.coeffs
        return a * a + b * b + self.level * (c * c + d * d)

    def trace(self) -> Fraction:
        """Half the reduced trace, i.e. ``(z + conj(z)) / 2``."""
        return self.coeffs[0]

    def reduced_trace(self) -> Fraction:
        return 2 * self.coeffs[0]

    def inverse(self) -> Quaternion:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return self.conjugate() / n

    def __repr__(self) -> str:
        names = ("", "i", "J", "K")
        parts = [f"{c}{n}" if n else f"{c}" for c, n in zip(self.coeffs, names) if c]
        return f"Quaternion({' + '.join(parts) or '0'}; N={self.level})"


def multiply(x: Quaternion, y: Quaternion) -> Quaternion:
    x._check(y)
    n = x.level
    a1, b1, c1, d1 = x.coeffs
    a2, b2, c2, d2 = y.coeffs
    return Quaternion(
        (
            a1 * a2 - b1 * b2 - n * (c1 * c2 + d1 * d2),
            a1 * b2 + b1 * a2 + n * (c1 * d2 - d1 * c2),
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ),
        n,
    )


def conj_trace_norm(x: Quaternion) -> tuple[Quaternion, Fraction, Fraction]:
    return x.conjugate(), x.trace(), x.norm()


def pairing(x: Quaternion, y: Quaternion) -> Fraction:
    """Bilinear form ``Nm(x + y) - Nm(x) - Nm(y)``; note ``pairing(x, x) = 2 Nm(x)``."""
    n = x.level
    a1, b1, c1, d1 = x.coeffs
    a2, b2, c2, d2 = y.coeffs
    return 2 * (a1 * a2 + b1 * b2 + n * (c1 * c2 + d1 * d2))


def gram_matrix(basis: Sequence[Quaternion]) -> list[list[Fraction]]:
    return [[pairing(u, v) for v in basis] for u in basis]


def det(m: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-free Gaussian elimination."""
    a = [[_frac(x) for x in row] for row in m]
    n = len(a)
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            result = -result
        result *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return result


# Rows give the order basis 1, i, (1+J)/2, (i+K)/2 in algebra coordinates.
_H = Fraction(1, 2)
ORDER_TO_ALGEBRA = (
    (Fraction(1), Fraction(0), Fraction(0), Fraction(0)),
    (Fraction(0), Fraction(1), Fraction(0), Fraction(0)),
    (_H, Fraction(0), _H, Fraction(0)),
    (Fraction(0), _H, Fraction(0), _H),
)


def order_to_algebra(v: Sequence) -> tuple[Fraction, ...]:
    """Map coordinates on the order basis to coordinates on ``{1, i, J, K}``."""
    v0, v1, v2, v3 = (_frac(x) for x in v)
    return (v0 + v2 / 2, v1 + v3 / 2, v2 / 2, v3 / 2)


def algebra_to_order(c: Sequence) -> tuple[Fraction, ...]:
    a, b, cc, d = (_frac(x) for x in c)
    return (a - cc, b - d, 2 * cc, 2 * d)


@dataclass(frozen=True)
class MaximalOrder:
    """The maximal order ``Z<1, i, (1+J)/2, (i+K)/2>`` for N = 3 mod 4.

    Besides the basis, this carries the integer structure constants used by the
    lattice code: ``mult[r][s]`` is the product ``e_r e_s`` on the order basis, and
    ``gram`` is the integer Gram matrix of :func:`pairing` on that basis.
    """

    params: AlgebraParams

    @property
    def level(self) -> int:
        return self.params.level

    @cached_property
    def basis(self) -> tuple[Quaternion, ...]:
        return tuple(Quaternion(row, self.level) for row in ORDER_TO_ALGEBRA)

    @cached_property
    def mult(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        table = []
        for x in self.basis:
            row = []
            for y in self.basis:
                coords = algebra_to_order(multiply(x, y).coeffs)
                if any(c.denominator != 1 for c in coords):
                    raise AssertionError("order basis is not closed under multiplication")
                row.append(tuple(int(c) for c in coords))
            table.append(tuple(row))
        return tuple(table)

    @cached_property
    def gram(self) -> tuple[tuple[int, ...], ...]:
        g = gram_matrix(self.basis)
        return tuple(tuple(int(x) for x in row) for row in g)

    @cached_property
    def conj_matrix(self) -> tuple[tuple[int, ...], ...]:
        rows = []
        for x in self.basis:
            coords = algebra_to_order(x.conjugate().coeffs)
            rows.append(tuple(int(c) for c in coords))
        return tuple(rows)

    # Integer-coordinate arithmetic on the order basis; inputs need not be in O.

    def mul(self, u: Sequence[int], v: Sequence[int]) -> list[int]:
        out = [0, 0, 0, 0]
        mt = self.mult
        for r in range(4):
            ur = u[r]
            if not ur:
                continue
            for s in range(4):
                c = ur * v[s]
                if not c:
                    continue
                e = mt[r][s]
                out[0] += c * e[0]
                out[1] += c * e[1]
                out[2] += c * e[2]
                out[3] += c * e[3]
        return out

    def conj(self, u: Sequence[int]) -> list[int]:
        cm = self.conj_matrix
        return [sum(u[r] * cm[r][s] for r in range(4)) for s in range(4)]

    def norm(self, u: Sequence[int]) -> int:
        """Reduced norm of an integer vector on the order basis (always an integer)."""
        g = self.gram
        q = sum(u[r] * g[r][s] * u[s] for r in range(4) for s in range(4))
        return q // 2

    def reduced_trace(self, u: Sequence[int]) -> int:
        # trd(e_0) = 2, trd(e_1) = 0, trd(e_2) = 1, trd(e_3) = 0
        return 2 * u[0] + u[2]

    def element(self, u: Sequence) -> Quaternion:
        return Quaternion(order_to_algebra(u), self.level)

    def coordinates(self, x: Quaternion) -> tuple[Fraction, ...]:
        return algebra_to_order(x.coeffs)


@lru_cache(maxsize=None)
def maximal_order(params: AlgebraParams | int) -> MaximalOrder:
    if isinstance(params, int):
        params = AlgebraParams(params)
    order = MaximalOrder(params)
    order.mult  # closure check
    if det(order.gram) != params.level**2:
        raise AssertionError("order discriminant mismatch")
    return order
