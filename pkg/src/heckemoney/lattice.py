"""Exact rank-4 lattices in H_N.

A lattice is stored as an integer Hermite normal form over the maximal-order
basis together with a common denominator, so two lattices are equal exactly
when their stored forms are equal.  Reduction always starts from that normal
form, which makes :func:`reduce` a function of the lattice alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .quaternion import MaximalOrder, Quaternion, det, maximal_order, order_to_algebra


def hnf(rows: Iterable[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form; zero rows are dropped.

    Pivots are positive and entries above a pivot lie in ``[0, pivot)``.
    """
    a = [list(r) for r in rows if any(r)]
    if not a:
        return []
    ncols = len(a[0])
    r = 0
    for col in range(ncols):
        if r == len(a):
            break
        while True:
            nz = [i for i in range(r, len(a)) if a[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][col]))
            a[r], a[piv] = a[piv], a[r]
            prow = a[r]
            pv = prow[col]
            clean = True
            for i in range(r + 1, len(a)):
                x = a[i][col]
                if x:
                    q = x // pv
                    a[i] = [u - q * w for u, w in zip(a[i], prow)]
                    if a[i][col]:
                        clean = False
            if clean:
                break
        if not any(a[i][col] for i in range(r, len(a))):
            continue
        if a[r][col] < 0:
            a[r] = [-u for u in a[r]]
        pv = a[r][col]
        for i in range(r):
            q = a[i][col] // pv
            if q:
                a[i] = [u - q * w for u, w in zip(a[i], a[r])]
        r += 1
    return [row for row in a[:r]]


def _content(rows: Sequence[Sequence[int]], denom: int) -> int:
    g = denom
    for row in rows:
        for x in row:
            g = math.gcd(g, x)
            if g == 1:
                return 1
    return g


class RankError(ValueError):
    """Generators do not span a full-rank lattice."""


class ContainmentError(ValueError):
    """A lattice expected to be a sublattice is not contained in the other."""


@dataclass(frozen=True)
class Lattice:
    """Full-rank lattice ``rows / denom`` in order-basis coordinates, in canonical form."""

    level: int
    rows: tuple[tuple[int, ...], ...]
    denom: int

    @classmethod
    def from_generators(cls, level: int, gens: Iterable[Sequence[int]], denom: int = 1) -> Lattice:
        h = hnf(gens)
        if len(h) != 4:
            raise RankError(f"generators span rank {len(h)}, need 4")
        g = _content(h, denom)
        if g > 1:
            h = [[x // g for x in row] for row in h]
            denom //= g
        if denom < 0:
            raise ValueError("negative denominator")
        return cls(level, tuple(tuple(row) for row in h), denom)

    @property
    def order(self) -> MaximalOrder:
        return maximal_order(self.level)

    @property
    def basis(self) -> tuple[Quaternion, ...]:
        o = self.order
        return tuple(o.element([Fraction(x, self.denom) for x in row]) for row in self.rows)

    @cached_property
    def int_gram(self) -> tuple[tuple[int, ...], ...]:
        return int_gram(self.order, self.rows)

    @property
    def gram(self) -> list[list[Fraction]]:
        d2 = self.denom**2
        return [[Fraction(x, d2) for x in row] for row in self.int_gram]

    @cached_property
    def volume(self) -> Fraction:
        """Index-like covolume relative to the maximal order (``[O : L]`` when ``L <= O``)."""
        return abs(det(self.rows)) / Fraction(self.denom) ** 4

    def solve(self, num: Sequence[int], den: int = 1) -> list[int] | None:
        """Integer coordinates of ``num / den`` on this basis, or None if not a member."""
        # num/den = x . rows/denom  <=>  num * denom = x . rows * den
        w = [v * self.denom for v in num]
        x = []
        col = 0
        for row in self.rows:
            while row[col] == 0:
                if w[col] != 0:
                    return None
                col += 1
            q, rem = divmod(w[col], row[col] * den)
            if rem:
                return None
            x.append(q)
            if q:
                w = [u - q * den * r for u, r in zip(w, row)]
            col += 1
        if any(w):
            return None
        return x

    def contains(self, num: Sequence[int], den: int = 1) -> bool:
        return self.solve(num, den) is not None

    def contains_lattice(self, other: Lattice) -> bool:
        return all(self.contains(row, other.denom) for row in other.rows)

    def scale(self, s: Fraction | int) -> Lattice:
        s = Fraction(s)
        return Lattice.from_generators(
            self.level, ([x * s.numerator for x in row] for row in self.rows), self.denom * s.denominator
        )

    def right_mul(self, num: Sequence[int], den: int = 1) -> Lattice:
        o = self.order
        return Lattice.from_generators(self.level, (o.mul(row, num) for row in self.rows), self.denom * den)

    def left_mul(self, num: Sequence[int], den: int = 1) -> Lattice:
        o = self.order
        return Lattice.from_generators(self.level, (o.mul(num, row) for row in self.rows), self.denom * den)

    def is_integral(self) -> bool:
        return self.denom == 1


def int_gram(order: MaximalOrder, rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    g = order.gram
    gv = [[sum(r[k] * g[k][l] for k in range(4)) for l in range(4)] for r in rows]
    return tuple(tuple(sum(a * b for a, b in zip(gr, s)) for s in rows) for gr in gv)


def _qform(g: Sequence[Sequence[int]], v: Sequence[int]) -> int:
    return sum(v[i] * g[i][j] * v[j] for i in range(4) for j in range(4))


def _algebra_key(row: Sequence[int], denom: int) -> tuple[Fraction, ...]:
    return order_to_algebra([Fraction(x, denom) for x in row])


def sign_normalize(row: Sequence[int]) -> tuple[int, ...]:
    """Flip ``row`` so its first nonzero coordinate on ``{1, i, J, K}`` is positive."""
    key = order_to_algebra(row)
    for c in key:
        if c:
            return tuple(row) if c > 0 else tuple(-x for x in row)
    return tuple(row)


def hermite_basis(generators: Sequence[Quaternion]) -> Lattice:
    """Lattice spanned by arbitrary rational quaternion generators."""
    if len(generators) < 4:
        raise RankError("need at least four generators")
    level = generators[0].level
    o = maximal_order(level)
    coords = [o.coordinates(g) for g in generators]
    den = 1
    for c in coords:
        for x in c:
            den = den * x.denominator // math.gcd(den, x.denominator)
    rows = [[int(x * den) for x in c] for c in coords]
    return Lattice.from_generators(level, rows, den)


@dataclass(frozen=True)
class ReducedBasis:
    """Greedy-reduced, sign-normalized, norm-sorted basis of a lattice."""

    level: int
    rows: tuple[tuple[int, ...], ...]
    denom: int

    @cached_property
    def key(self) -> tuple[Fraction, ...]:
        return tuple(c for row in self.rows for c in _algebra_key(row, self.denom))

    @property
    def basis(self) -> tuple[Quaternion, ...]:
        o = maximal_order(self.level)
        return tuple(o.element([Fraction(x, self.denom) for x in row]) for row in self.rows)

    @property
    def norms(self) -> tuple[Fraction, ...]:
        o = maximal_order(self.level)
        return tuple(Fraction(o.norm(r), self.denom**2) for r in self.rows)

    @cached_property
    def lattice(self) -> Lattice:
        return Lattice.from_generators(self.level, self.rows, self.denom)

    def __lt__(self, other: ReducedBasis) -> bool:
        return self.key < other.key


def _greedy(order: MaximalOrder, rows: list[list[int]]) -> list[list[int]]:
    g = order.gram
    n = len(rows)
    q = [_qform(g, r) for r in rows]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                bij = sum(rows[i][k] * g[k][l] * rows[j][l] for k in range(4) for l in range(4))
                mu = (2 * bij + q[j]) // (2 * q[j])
                if not mu:
                    continue
                cand = [a - mu * b for a, b in zip(rows[i], rows[j])]
                qc = _qform(g, cand)
                if qc < q[i]:
                    rows[i], q[i] = cand, qc
                    changed = True
    return rows


def reduce(lattice: Lattice) -> ReducedBasis:
    order = lattice.order
    rows = _greedy(order, [list(r) for r in lattice.rows])
    rows = [sign_normalize(r) for r in rows]
    g = order.gram
    rows.sort(key=lambda r: (_qform(g, r), _algebra_key(r, 1)))
    return ReducedBasis(lattice.level, tuple(rows), lattice.denom)


def _ldl(gram: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(gram)
    q = [[Fraction(x) for x in row] for row in gram]
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def _int_range(center: Fraction, t: Fraction) -> range:
    s = math.sqrt(float(t))
    c = float(center)
    lo = math.floor(c - s) - 1
    hi = math.ceil(c + s) + 1
    while (lo - center) ** 2 > t and lo <= hi:
        lo += 1
    while (hi - center) ** 2 > t and hi >= lo:
        hi -= 1
    return range(lo, hi + 1)


def enumerate_short(gram: Sequence[Sequence], bound) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """Fincke-Pohst: yield every ``(x, x G x^T)`` with value at most ``bound``, including 0."""
    n = len(gram)
    q = _ldl(gram)
    bound = Fraction(bound)
    x = [0] * n

    def rec(i: int, remaining: Fraction) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        center = -sum((q[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        if remaining < 0:
            return
        for xi in _int_range(center, remaining / q[i][i]):
            used = q[i][i] * (xi - center) ** 2
            if used > remaining:
                continue
            x[i] = xi
            if i == 0:
                yield tuple(x), bound - (remaining - used)
            else:
                yield from rec(i - 1, remaining - used)
        x[i] = 0

    yield from rec(n - 1, bound)


def _combine(coeffs: Sequence[int], rows: Sequence[Sequence[int]]) -> tuple[int, ...]:
    return tuple(sum(c * r[k] for c, r in zip(coeffs, rows)) for k in range(4))


def minimal_vectors(lattice: Lattice) -> tuple[int, list[tuple[int, ...]]]:
    """Minimal value of the integer form and all minimal numerators, one per sign pair.

    Values are ``2 * Nm(v) * denom**2``; numerators are over ``lattice.denom``.
    """
    red = reduce(lattice)
    g = int_gram(lattice.order, red.rows)
    radius = min(g[i][i] for i in range(4))
    best = None
    found: list[tuple[int, ...]] = []
    for x, val in enumerate_short(g, radius):
        if val == 0:
            continue
        if best is None or val < best:
            best, found = val, []
        if val == best:
            found.append(x)
    vecs = sorted({sign_normalize(_combine(x, red.rows)) for x in found}, key=lambda r: _algebra_key(r, 1))
    return int(best), vecs


def shortest_vectors(lattice: Lattice) -> list[Quaternion]:
    _, vecs = minimal_vectors(lattice)
    o = lattice.order
    return [o.element([Fraction(x, lattice.denom) for x in v]) for v in vecs]


def index(sub: Lattice, sup: Lattice) -> int:
    if sub.level != sup.level:
        raise ValueError("lattices from different algebras")
    if not sup.contains_lattice(sub):
        raise ContainmentError("first lattice is not contained in the second")
    ratio = sub.volume / sup.volume
    if ratio.denominator != 1:
        raise AssertionError("non-integral index")
    return int(ratio)


def canonicalize_tiebreak(candidates: Sequence[ReducedBasis]) -> ReducedBasis:
    if not candidates:
        raise ValueError("no candidates")
    return min(candidates, key=lambda c: c.key)
