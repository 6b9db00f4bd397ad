"""Left ideals of O_N, canonical class representatives, and the class set.

The canonical representative of a class ``[I]`` is ``I z^-1`` for a minimal
element ``z`` of ``I``, reduced, with the lexicographically least outcome over
all minimal ``z``.  Its integral form ``m I z^-1`` sits between ``m O_N`` and
``O_N`` and is encoded by a triple ``(d, a, b)`` with ``m = d b``.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import sympy
from sympy.ntheory.modular import crt

from .lattice import Lattice, ReducedBasis, canonicalize_tiebreak, enumerate_short, hnf, minimal_vectors, reduce
from .quaternion import AlgebraParams, MaximalOrder, algebra_to_order, maximal_order
from .splitting import split_idempotent, split_order

log = logging.getLogger(__name__)

BOX_CONSTANT = 4
"""C in the bound ``m <= C sqrt(N)`` on canonical denominators."""

CANON_RULE_VERSION = "canon-v1"
TABLE_FORMAT = "heckemoney-classes v1"


class IdealError(ValueError):
    pass


class EnumerationError(RuntimeError):
    pass


def _params(params: AlgebraParams | int) -> AlgebraParams:
    return params if isinstance(params, AlgebraParams) else AlgebraParams(params)


@dataclass(frozen=True)
class LeftIdeal:
    lattice: Lattice

    def __post_init__(self) -> None:
        order = self.order
        lat = self.lattice
        for k in range(4):
            e = [int(i == k) for i in range(4)]
            for row in lat.rows:
                if not lat.contains(order.mul(e, row), lat.denom):
                    raise IdealError("lattice is not closed under left multiplication by O_N")

    @property
    def order(self) -> MaximalOrder:
        return maximal_order(self.lattice.level)

    @property
    def level(self) -> int:
        return self.lattice.level

    @classmethod
    def unit(cls, params: AlgebraParams | int) -> LeftIdeal:
        level = _params(params).level
        return cls(Lattice.from_generators(level, [[int(i == j) for j in range(4)] for i in range(4)]))

    def right_mul(self, num: Sequence[int], den: int = 1) -> LeftIdeal:
        return LeftIdeal(self.lattice.right_mul(num, den))

    def norm(self) -> Fraction:
        """Reduced norm of the ideal: the square root of its volume relative to O_N."""
        v = self.lattice.volume
        n, d = math.isqrt(v.numerator), math.isqrt(v.denominator)
        if n * n != v.numerator or d * d != v.denominator:
            raise IdealError("ideal volume is not a square")
        return Fraction(n, d)


@dataclass(frozen=True)
class IdealClassRep:
    canonical_lattice: ReducedBasis
    integral_form: LeftIdeal
    m: int

    @property
    def level(self) -> int:
        return self.canonical_lattice.level

    @cached_property
    def ideal(self) -> LeftIdeal:
        """The fractional ideal ``I z^-1`` itself."""
        return LeftIdeal(self.canonical_lattice.lattice)

    @property
    def key(self):
        return self.canonical_lattice.key


@dataclass(frozen=True)
class TripleCode:
    """Encodes the point ``[d : a]`` of ``P^1(Z/m)`` with ``m = d b``.

    ``a`` is a residue mod ``b`` taken in ``[1, b]``.  When ``gcd(a, d) > 1`` the
    vector ``(d, a)`` is not primitive; the point is then ``[d : a']`` with ``a'``
    the least positive lift of ``a`` mod ``b`` that is coprime to ``d``.  This
    keeps the code a bijection onto ``P^1(Z/m)``.
    """

    d: int
    a: int
    b: int

    def __post_init__(self) -> None:
        if min(self.d, self.a, self.b) < 1:
            raise IdealError(f"triple entries must be positive: {self}")
        if math.gcd(self.a, self.d, self.b) != 1:
            raise IdealError(f"gcd(a, d, b) > 1 in {self}")
        if self.a > self.b:
            raise IdealError(f"a > b in {self}")

    @property
    def m(self) -> int:
        return self.d * self.b

    @property
    def coprime(self) -> bool:
        """True when ``gcd(a, d) = 1``, so no lift is needed."""
        return math.gcd(self.a, self.d) == 1

    def point(self) -> tuple[int, int]:
        a = self.a
        while math.gcd(a, self.d) != 1:
            a += self.b
        return self.d % self.m, a % self.m


def is_admissible(d: int, a: int, b: int) -> bool:
    return d >= 1 and 1 <= a <= b and math.gcd(a, d, b) == 1


def _as_ideal(ideal: LeftIdeal | IdealClassRep) -> LeftIdeal:
    return ideal.ideal if isinstance(ideal, IdealClassRep) else ideal


def canonical_rep(ideal: LeftIdeal | Lattice) -> IdealClassRep:
    lat = ideal.lattice if isinstance(ideal, LeftIdeal) else ideal
    order = lat.order
    _, zs = minimal_vectors(lat)
    candidates = []
    for u in zs:
        # z = u / D and z^-1 = D conj(u) / Nm(u)
        zinv = [x * lat.denom for x in order.conj(u)]
        candidates.append(reduce(lat.right_mul(zinv, order.norm(u))))
    best = canonicalize_tiebreak(candidates)
    m = best.denom
    integral = Lattice.from_generators(lat.level, best.rows, 1)
    return IdealClassRep(best, LeftIdeal(integral), m)


def unit_group_order(rep: IdealClassRep | LeftIdeal) -> int:
    """Number of units in the right order of the ideal."""
    ideal = _as_ideal(rep)
    lat = ideal.lattice
    order = lat.order
    nrd = ideal.norm()
    gens = [order.mul(order.conj(r), s) for r in lat.rows for s in lat.rows]
    right = Lattice.from_generators(lat.level, [[x * nrd.denominator for x in g] for g in gens],
                                    lat.denom**2 * nrd.numerator)
    if right.volume != 1:
        raise IdealError("right order is not maximal")
    target = 2 * right.denom**2
    return sum(1 for _, val in enumerate_short(right.int_gram, target) if val == target)


def _p1_points(p: int):
    for t in range(p):
        yield (1, t)
    yield (0, 1)


def _rowspace_mod(rows: Sequence[Sequence[int]], p: int) -> list[list[int]]:
    basis: list[list[int]] = []
    pivots: list[int] = []
    for r in rows:
        v = [x % p for x in r]
        for b, c in zip(basis, pivots):
            if v[c]:
                f = v[c]
                v = [(x - f * y) % p for x, y in zip(v, b)]
        c = next((i for i, x in enumerate(v) if x), None)
        if c is None:
            continue
        inv = pow(v[c], -1, p)
        v = [x * inv % p for x in v]
        for i, b in enumerate(basis):
            if b[c]:
                f = b[c]
                basis[i] = [(x - f * y) % p for x, y in zip(b, v)]
        basis.append(v)
        pivots.append(c)
    return basis


def p_neighbors(ideal: LeftIdeal | IdealClassRep, p: int) -> list[LeftIdeal]:
    """The p+1 left ideals J with ``p I < J < I`` and ``I/J = (Z/p)^2``."""
    ideal = _as_ideal(ideal)
    lat = ideal.lattice
    level = lat.level
    if p == level:
        raise IdealError("p must differ from the level")
    if not sympy.isprime(p):
        raise IdealError(f"{p} is not prime")
    order = lat.order
    rows = lat.rows

    def left_matrix(x: Sequence[int]) -> list[list[int]]:
        out = []
        for r in rows:
            c = lat.solve(order.mul(x, r), lat.denom)
            if c is None:
                raise IdealError("lattice is not a left ideal")
            out.append(c)
        return out

    e = split_idempotent(level, p)
    mats = [left_matrix([int(i == k) for i in range(4)]) for k in range(4)]
    image = _rowspace_mod(left_matrix(e), p)
    if len(image) != 2:
        raise IdealError(f"idempotent image has dimension {len(image)}, expected 2")
    y1, y2 = image
    out = []
    for s, t in _p1_points(p):
        y = [(s * a + t * b) % p for a, b in zip(y1, y2)]
        gens = [[p * x for x in r] for r in rows]
        for mk in mats:
            c = [sum(y[i] * mk[i][j] for i in range(4)) for j in range(4)]
            gens.append([sum(c[i] * rows[i][k] for i in range(4)) for k in range(4)])
        j = Lattice.from_generators(level, gens, lat.denom)
        if j.volume != lat.volume * p * p:
            raise IdealError("neighbor has the wrong index")
        out.append(LeftIdeal(j))
    return out


@dataclass(frozen=True)
class ClassGroupTable:
    params: AlgebraParams
    reps: tuple[IdealClassRep, ...]
    weights: tuple[int, ...]
    _positions: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_positions", {r.key: i for i, r in enumerate(self.reps)})
        if len(self._positions) != len(self.reps):
            raise EnumerationError("duplicate class representatives")

    @property
    def level(self) -> int:
        return self.params.level

    @property
    def h(self) -> int:
        return len(self.reps)

    def position(self, rep: IdealClassRep) -> int:
        return self._positions[rep.key]

    def locate(self, ideal: LeftIdeal | Lattice) -> int:
        return self.position(canonical_rep(ideal))

    def mass(self) -> Fraction:
        return sum((Fraction(1, w) for w in self.weights), Fraction(0))

    def dumps(self) -> str:
        lines = [TABLE_FORMAT, f"rule {CANON_RULE_VERSION}", f"level {self.level}", f"count {self.h}"]
        for rep, w in zip(self.reps, self.weights):
            code = triple_encode(rep)
            coords = " ".join(str(c) for c in rep.canonical_lattice.key)
            lines.append(f"class {rep.m} {code.d} {code.a} {code.b} {coords} {w}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> ClassGroupTable:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != TABLE_FORMAT:
            raise ValueError("unrecognised class table format")
        if lines[1] != f"rule {CANON_RULE_VERSION}":
            raise ValueError("class table was written under a different canonicalization rule")
        level = int(lines[2].split()[1])
        count = int(lines[3].split()[1])
        reps, weights = [], []
        for ln in lines[4:]:
            parts = ln.split()
            if parts[0] != "class" or len(parts) != 22:
                raise ValueError(f"malformed class line: {ln!r}")
            m = int(parts[1])
            coords = [Fraction(x) for x in parts[5:21]]
            rows = [algebra_to_order(coords[4 * i:4 * i + 4]) for i in range(4)]
            den = math.lcm(*(x.denominator for r in rows for x in r))
            irows = tuple(tuple(int(x * den) for x in r) for r in rows)
            red = ReducedBasis(level, irows, den)
            if den != m:
                raise ValueError("stored m disagrees with the basis denominator")
            integral = LeftIdeal(Lattice.from_generators(level, irows, 1))
            reps.append(IdealClassRep(red, integral, m))
            weights.append(int(parts[21]))
        if len(reps) != count:
            raise ValueError("class count mismatch")
        return cls(AlgebraParams(level), tuple(reps), tuple(weights))


def enumerate_classes(params: AlgebraParams | int, max_classes: int | None = None) -> ClassGroupTable:
    """Breadth-first search over p-neighbors, certified by the mass formula."""
    params = _params(params)
    level = params.level
    cap = max_classes or level  # h is about N/12
    target = Fraction(level - 1, 24)
    start = canonical_rep(LeftIdeal.unit(params))
    found = {start.key: start}
    weights: dict = {}
    for p in (2, 3):
        queue = deque(found.values())
        while queue:
            rep = queue.popleft()
            for nb in p_neighbors(rep, p):
                r = canonical_rep(nb)
                if r.key not in found:
                    found[r.key] = r
                    queue.append(r)
                    if len(found) > cap:
                        raise EnumerationError(f"class enumeration exceeded {cap} classes")
        for key, rep in found.items():
            if key not in weights:
                weights[key] = unit_group_order(rep)
        mass = sum(Fraction(1, w) for w in weights.values())
        if mass == target:
            break
        log.warning("mass %s != %s after %d-neighbors; extending", mass, target, p)
    else:
        raise EnumerationError(f"class set incomplete: mass {mass} != {target}")
    keys = sorted(found)
    bound = BOX_CONSTANT * math.sqrt(level)
    for k in keys:
        if found[k].m > bound:
            raise EnumerationError(f"canonical m = {found[k].m} exceeds {BOX_CONSTANT} sqrt(N)")
    return ClassGroupTable(params, tuple(found[k] for k in keys), tuple(weights[k] for k in keys))


def _normalize_p1(x: int, y: int, m: int) -> tuple[int, int, int]:
    """Scale the primitive vector (x, y) mod m to (d, y') with d = gcd(x, m)."""
    d = math.gcd(x, m)
    b = m // d
    t = (x // d) % b if b > 1 else 0
    lam = pow(t, -1, b) if b > 1 else 1
    while math.gcd(lam, m) != 1:
        lam += b
    return d, b, lam * y % m


def triple_encode(rep: IdealClassRep) -> TripleCode:
    m = rep.m
    level = rep.level
    if math.gcd(m, level) != 1:
        raise IdealError(f"m = {m} shares a factor with N = {level}")
    if m == 1:
        return TripleCode(1, 1, 1)
    split = split_order(level, m)
    mats = [split.image(r) for r in rep.integral_form.lattice.rows]
    residues_x, residues_y, moduli = [], [], []
    for p, k in sorted(sympy.factorint(m).items()):
        q = p**k
        rows = [(r[0] % q, r[1] % q) for mat in mats for r in mat]
        u = next((r for r in rows if r[0] % p or r[1] % p), None)
        if u is None:
            raise IdealError("integral form has no primitive row")
        v = (-u[1] % q, u[0])
        if any((r[0] * v[0] + r[1] * v[1]) % q for r in rows):
            raise IdealError("integral form is not of kernel type")
        residues_x.append(v[0])
        residues_y.append(v[1])
        moduli.append(q)
    x = int(crt(moduli, residues_x)[0])
    y = int(crt(moduli, residues_y)[0])
    d, b, y = _normalize_p1(x, y, m)
    return TripleCode(d, y % b or b, b)


def triple_decode(code: TripleCode, params: AlgebraParams | int) -> LeftIdeal:
    params = _params(params)
    level = params.level
    TripleCode(code.d, code.a, code.b)
    m = code.m
    if math.gcd(m, level) != 1:
        raise IdealError(f"m = {m} shares a factor with N = {level}")
    if m == 1:
        return LeftIdeal.unit(params)
    split = split_order(level, m)
    v = code.point()
    rows = []
    for k, img in enumerate(split.images):
        av = [(img[i][0] * v[0] + img[i][1] * v[1]) % m for i in range(2)]
        rows.append(av + [int(i == k) for i in range(4)])
    rows.append([m, 0, 0, 0, 0, 0])
    rows.append([0, m, 0, 0, 0, 0])
    kernel = [r[2:] for r in hnf(rows) if r[0] == 0 and r[1] == 0]
    lat = Lattice.from_generators(level, kernel, 1)
    if lat.volume != m * m:
        raise IdealError(f"decoded ideal has index {lat.volume}, expected {m * m}")
    return LeftIdeal(lat)


def is_canonical_triple(code: TripleCode, params: AlgebraParams | int) -> bool:
    params = _params(params)
    if math.gcd(code.m, params.level) != 1:
        return False
    ideal = triple_decode(code, params)
    val, _ = minimal_vectors(ideal.lattice)
    if val < 2 * code.m**2:
        return False
    return canonical_rep(ideal).integral_form == ideal
