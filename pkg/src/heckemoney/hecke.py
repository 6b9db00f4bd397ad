"""Brandt matrices and the Hecke operators they induce on the cuspidal space V_N."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy

from .ideals import ClassGroupTable, IdealError, p_neighbors
from .splitting import SplittingData, split_order

__all__ = [
    "BrandtMatrix",
    "HeckeOperator",
    "EigenSystem",
    "InsufficientSeparation",
    "SplittingData",
    "split_order",
    "p_neighbors",
    "brandt_matrix",
    "restrict_and_symmetrize",
    "joint_eigensystem",
    "phase_scale",
    "cusp_basis",
    "default_primes",
    "weighted_ones",
]

RESIDUAL_TOL = 1e-9
COMMUTE_TOL = 1e-9
CLUSTER_TOL = 1e-7


class InsufficientSeparation(ValueError):
    """Joint eigenvalue vectors collide; more Hecke primes are needed."""


class WeightedSymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class BrandtMatrix:
    p: int
    level: int
    entries: tuple[tuple[int, ...], ...]

    @property
    def h(self) -> int:
        return len(self.entries)

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def row_sums(self) -> list[int]:
        return [sum(r) for r in self.entries]

    def weighted_symmetric(self, weights: Sequence[int]) -> bool:
        e = self.entries
        n = self.h
        return all(weights[j] * e[i][j] == weights[i] * e[j][i] for i in range(n) for j in range(n))

    def symmetric(self) -> bool:
        e = self.entries
        return all(e[i][j] == e[j][i] for i in range(self.h) for j in range(self.h))

    def __matmul__(self, other: BrandtMatrix) -> list[list[int]]:
        a, b = self.entries, other.entries
        n = self.h
        return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def brandt_matrix(table: ClassGroupTable, p: int) -> BrandtMatrix:
    if table.level % p == 0:
        raise IdealError("p must not divide the level")
    h = table.h
    rows = []
    for rep in table.reps:
        row = [0] * h
        for nb in p_neighbors(rep, p):
            row[table.locate(nb)] += 1
        rows.append(tuple(row))
    bm = BrandtMatrix(p, table.level, tuple(rows))
    if any(s != p + 1 for s in bm.row_sums()):
        raise AssertionError(f"Brandt row sums differ from {p + 1}")
    return bm


def phase_scale(p: int) -> float:
    """Scale s_p with ``|s_p * lambda| < 1`` for every Ramanujan-bounded eigenvalue."""
    ceil_sqrt = math.isqrt(p - 1) + 1
    return 1.0 / (2 * ceil_sqrt + 2)


@lru_cache(maxsize=None)
def cusp_basis(weights: tuple[int, ...]) -> np.ndarray:
    """Orthonormal basis (columns) of the complement of ``u_i ~ 1/sqrt(w_i)``.

    Built from a Householder reflection sending ``u`` to the last coordinate
    vector, so the result depends only on the weights.
    """
    w = np.array(weights, dtype=float)
    u = 1.0 / np.sqrt(w)
    u /= np.linalg.norm(u)
    h = len(u)
    e = np.zeros(h)
    e[-1] = 1.0
    v = u - e
    nv = v @ v
    refl = np.eye(h) if nv < 1e-30 else np.eye(h) - 2.0 * np.outer(v, v) / nv
    q = refl[:, : h - 1].copy()
    q.setflags(write=False)
    return q


def weighted_ones(weights: Sequence[int]) -> np.ndarray:
    u = 1.0 / np.sqrt(np.asarray(weights, dtype=float))
    return u / np.linalg.norm(u)


@dataclass(frozen=True, eq=False)
class HeckeOperator:
    p: int
    matrix: np.ndarray
    scale: float
    ambient: np.ndarray  # symmetrized Brandt matrix on the full class space

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix) if self.dim else np.zeros(0)

    def ramanujan_ok(self, tol: float = 1e-6) -> bool:
        return bool(np.all(np.abs(self.eigenvalues()) <= 2 * math.sqrt(self.p) + tol))


def restrict_and_symmetrize(m: BrandtMatrix, weights: Sequence[int]) -> HeckeOperator:
    weights = tuple(int(w) for w in weights)
    if not m.weighted_symmetric(weights):
        raise WeightedSymmetryError(f"M_{m.p} fails w_j M_ij = w_i M_ji")
    h = m.h
    e = m.entries
    s = np.zeros((h, h))
    for i in range(h):
        for j in range(i, h):
            # S_ij^2 = M_ij^2 w_j / w_i, and equals S_ji^2 exactly by weighted symmetry
            sq = Fraction(e[i][j] ** 2 * weights[j], weights[i])
            if sq != Fraction(e[j][i] ** 2 * weights[i], weights[j]):
                raise WeightedSymmetryError("symmetrized entries disagree")
            s[i, j] = s[j, i] = math.sqrt(sq)
    q = cusp_basis(weights)
    a = q.T @ s @ q
    a = (a + a.T) / 2
    return HeckeOperator(m.p, a, phase_scale(m.p), s)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    primes: tuple[int, ...]
    basis: np.ndarray  # columns, in cusp-space coordinates
    eigenvalue_vectors: np.ndarray  # row i holds the a_p eigenvalues of basis vector i
    separation: float
    scales: tuple[float, ...]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def phase_vectors(self) -> np.ndarray:
        return self.eigenvalue_vectors * np.asarray(self.scales)[None, :]

    @property
    def phase_separation(self) -> float:
        return _min_distance(self.phase_vectors)


def _min_distance(vecs: np.ndarray) -> float:
    n = vecs.shape[0]
    if n < 2:
        return sys.float_info.max
    diff = vecs[:, None, :] - vecs[None, :, :]
    d = np.sqrt((diff**2).sum(axis=-1))
    d[np.diag_indices(n)] = np.inf
    return float(d.min())


def _clusters(vals: np.ndarray, tol: float) -> list[list[int]]:
    groups = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[i - 1] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _refine(vecs: np.ndarray, mats: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Split the span of ``vecs`` into joint eigenspaces of ``mats``."""
    if vecs.shape[1] == 1 or not mats:
        return [vecs]
    a = mats[0]
    sub = vecs.T @ a @ vecs
    vals, rot = np.linalg.eigh((sub + sub.T) / 2)
    scale = max(1.0, float(np.abs(vals).max()))
    out = []
    for g in _clusters(vals, CLUSTER_TOL * scale):
        out.extend(_refine(vecs @ rot[:, g], mats[1:]))
    return out


def joint_eigensystem(ops: Sequence[HeckeOperator], seed: int = 0) -> EigenSystem:
    if not ops:
        raise ValueError("need at least one operator")
    n = ops[0].dim
    if any(op.dim != n for op in ops):
        raise ValueError("operators act on spaces of different dimension")
    if n == 0:
        raise ValueError("the cusp space is zero-dimensional")
    mats = [op.matrix for op in ops]
    for i, a in enumerate(mats):
        for b in mats[i + 1:]:
            if np.abs(a @ b - b @ a).max() > COMMUTE_TOL * max(1.0, np.abs(a).max() * np.abs(b).max()):
                raise ValueError("operators do not commute")
    coeffs = np.random.default_rng(seed).standard_normal(len(mats))
    combo = sum(c * a for c, a in zip(coeffs, mats))
    vals, vecs = np.linalg.eigh(combo)
    scale = max(1.0, float(np.abs(vals).max()))
    blocks = []
    for g in _clusters(vals, CLUSTER_TOL * scale):
        blocks.extend(_refine(vecs[:, g], mats))
    basis = np.concatenate(blocks, axis=1)
    for k in range(basis.shape[1]):
        col = basis[:, k]
        piv = int(np.argmax(np.abs(col) > 1e-8))
        if col[piv] < 0:
            basis[:, k] = -col
    ev = np.array([[b @ a @ b for a in mats] for b in basis.T])
    for k, b in enumerate(basis.T):
        for j, a in enumerate(mats):
            if np.linalg.norm(a @ b - ev[k, j] * b) > RESIDUAL_TOL:
                raise ArithmeticError("joint eigenvector residual above tolerance")
    order = sorted(range(n), key=lambda k: tuple(np.round(ev[k], 9)))
    basis = basis[:, order]
    ev = ev[order]
    sep = _min_distance(ev)
    if sep <= CLUSTER_TOL:
        raise InsufficientSeparation(
            f"eigenvalue vectors collide for primes {[op.p for op in ops]}; add more primes"
        )
    basis.setflags(write=False)
    ev.setflags(write=False)
    return EigenSystem(tuple(op.p for op in ops), basis, ev, sep, tuple(op.scale for op in ops))


def default_primes(level: int, count: int) -> list[int]:
    out = []
    p = 2
    while len(out) < count:
        if p != level:
            out.append(p)
        p = int(sympy.nextprime(p))
    return out
