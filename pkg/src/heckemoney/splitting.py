"""Explicit isomorphisms ``O_N / m  ->  M_2(Z/m)`` for m coprime to N."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import sympy
from sympy.ntheory.modular import crt

from .quaternion import AlgebraParams, MaximalOrder, maximal_order

Mat2 = tuple[tuple[int, int], tuple[int, int]]

ATTEMPT_BUDGET = 4
"""Coefficient box radius searched for a split element."""


class SplittingError(ArithmeticError):
    pass


def _level(params: AlgebraParams | int) -> int:
    return params.level if isinstance(params, AlgebraParams) else AlgebraParams(params).level


def _mulmod(order: MaximalOrder, u: Sequence[int], v: Sequence[int], q: int) -> list[int]:
    return [x % q for x in order.mul(u, v)]


def _small_vectors(radius: int):
    for r in range(1, radius + 1):
        for v in itertools.product(range(-r, r + 1), repeat=4):
            if max(abs(x) for x in v) == r:
                yield list(v)


@lru_cache(maxsize=None)
def split_idempotent(level: int, p: int) -> tuple[int, ...]:
    """An element of O_N whose image in O_N/p is a rank-one idempotent."""
    if p == level or not sympy.isprime(p):
        raise SplittingError(f"{p} is not a prime distinct from {level}")
    order = maximal_order(level)
    one = [1, 0, 0, 0]
    for u in _small_vectors(ATTEMPT_BUDGET):
        t = order.reduced_trace(u)
        n = order.norm(u)
        if p == 2:
            if t % 2 == 1 and n % 2 == 0:
                e = [x % 2 for x in u]
            else:
                continue
        else:
            disc = (t * t - 4 * n) % p
            if disc == 0 or sympy.legendre_symbol(disc, p) != 1:
                continue
            s = sympy.sqrt_mod(disc, p)
            r2 = (t - s) * pow(2, -1, p) % p
            inv = pow(s, -1, p)
            e = [(x - r2 * o) * inv % p for x, o in zip(u, one)]
        if _mulmod(order, e, e, p) == e and e != [0, 0, 0, 0] and e != one:
            return tuple(e)
    raise SplittingError(f"no split element found mod {p} for level {level}")


def _lift_idempotent(order: MaximalOrder, e: Sequence[int], p: int, k: int) -> list[int]:
    q = p**k
    e = [x % q for x in e]
    prec = 1
    while prec < k:
        prec *= 2
        e2 = _mulmod(order, e, e, q)
        e3 = _mulmod(order, e2, e, q)
        e = [(3 * a - 2 * b) % q for a, b in zip(e2, e3)]
    if _mulmod(order, e, e, q) != e:
        raise SplittingError("idempotent lifting failed")
    return e


def _scalar_of(y: Sequence[int], e: Sequence[int], p: int, q: int) -> int:
    c = next(i for i in range(4) if e[i] % p)
    lam = y[c] * pow(e[c], -1, q) % q
    if any((lam * ei - yi) % q for ei, yi in zip(e, y)):
        raise SplittingError("element is not a multiple of the idempotent")
    return lam


def _prime_power_images(level: int, p: int, k: int) -> list[Mat2]:
    order = maximal_order(level)
    q = p**k
    e11 = _lift_idempotent(order, split_idempotent(level, p), p, k)
    e22 = [((1 if i == 0 else 0) - x) % q for i, x in enumerate(e11)]
    basis = [[int(i == j) for j in range(4)] for i in range(4)]
    candidates = basis + [[a + b for a, b in zip(u, v)] for u, v in itertools.combinations(basis, 2)]

    def generator(left, right):
        for b in candidates:
            x = _mulmod(order, _mulmod(order, left, b, q), right, q)
            if any(c % p for c in x):
                return x
        raise SplittingError("no off-diagonal matrix unit found")

    e12 = generator(e11, e22)
    f = generator(e22, e11)
    lam = _scalar_of(_mulmod(order, e12, f, q), e11, p, q)
    e21 = [x * pow(lam, -1, q) % q for x in f]
    row_units = (e11, e12)
    col_units = (e11, e21)
    images = []
    for x in basis:
        mat = tuple(
            tuple(
                _scalar_of(_mulmod(order, _mulmod(order, row_units[i], x, q), col_units[j], q), e11, p, q)
                for j in range(2)
            )
            for i in range(2)
        )
        images.append(mat)
    return images


def matmul2(a: Mat2, b: Mat2, m: int) -> Mat2:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(2)) % m for j in range(2)) for i in range(2)
    )


@dataclass(frozen=True)
class SplittingData:
    level: int
    modulus: int
    images: tuple[Mat2, Mat2, Mat2, Mat2]

    def image(self, v: Sequence[int]) -> Mat2:
        m = self.modulus
        return tuple(
            tuple(sum(c * img[i][j] for c, img in zip(v, self.images)) % m for j in range(2))
            for i in range(2)
        )

    def check(self) -> None:
        m = self.modulus
        order = maximal_order(self.level)
        if self.images[0] != ((1 % m, 0), (0, 1 % m)):
            raise SplittingError("image of 1 is not the identity")
        for r in range(4):
            for s in range(4):
                lhs = matmul2(self.images[r], self.images[s], m)
                rhs = self.image(order.mult[r][s])
                if lhs != rhs:
                    raise SplittingError(f"multiplication not respected on basis pair {(r, s)}")


@lru_cache(maxsize=None)
def _split_cached(level: int, m: int) -> SplittingData:
    if m < 2:
        raise ValueError("modulus must exceed 1")
    if math.gcd(m, level) != 1:
        raise SplittingError(f"modulus {m} is not coprime to {level}")
    parts = [(p, k, _prime_power_images(level, p, k)) for p, k in sorted(sympy.factorint(m).items())]
    moduli = [p**k for p, k, _ in parts]
    images = []
    for b in range(4):
        mat = []
        for i in range(2):
            row = []
            for j in range(2):
                residues = [imgs[b][i][j] for _, _, imgs in parts]
                row.append(int(crt(moduli, residues)[0]) % m)
            mat.append(tuple(row))
        images.append(tuple(mat))
    data = SplittingData(level, m, tuple(images))
    data.check()
    return data


def split_order(params: AlgebraParams | int, m: int) -> SplittingData:
    return _split_cached(_level(params), m)
