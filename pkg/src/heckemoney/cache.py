"""Text cache of class tables and Brandt matrices.

Files are keyed by level, requested primes, the table format and the
canonicalization rule, so changing any of them misses the cache.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path
from typing import Sequence

import numpy as np

from .hecke import BrandtMatrix
from .ideals import CANON_RULE_VERSION, TABLE_FORMAT, ClassGroupTable
from .money import ProtocolContext, build_context

CACHE_FORMAT = "heckemoney-cache v1"
CACHE_ENV = "HECKEMONEY_CACHE"


class CacheError(ValueError):
    pass


def default_cache_dir() -> Path | None:
    value = os.environ.get(CACHE_ENV)
    return Path(value) if value else None


def cache_key(level: int, primes: Sequence[int] | None) -> str:
    spec = "auto" if primes is None else ",".join(str(p) for p in primes)
    raw = f"{level}|{spec}|{CACHE_FORMAT}|{TABLE_FORMAT}|{CANON_RULE_VERSION}"
    return hashlib.sha256(raw.encode()).hexdigest()[:16]


def cache_path(directory: Path, level: int, primes: Sequence[int] | None) -> Path:
    return Path(directory) / f"level{level}-{cache_key(level, primes)}.txt"


def dumps(ctx: ProtocolContext) -> str:
    lines = [CACHE_FORMAT, f"primes {','.join(map(str, ctx.primes))}"]
    for m in ctx.brandt:
        lines.append(f"brandt {m.p} " + ";".join(",".join(map(str, row)) for row in m.entries))
    for vec in ctx.eigensystem.eigenvalue_vectors:
        lines.append("eigen " + " ".join(f"{x:.17g}" for x in vec))
    return "\n".join(lines) + "\n" + ctx.table.dumps()


def loads(text: str) -> tuple[ClassGroupTable, tuple[int, ...], list[BrandtMatrix], list[list[float]]]:
    lines = text.splitlines()
    if not lines or lines[0] != CACHE_FORMAT:
        raise CacheError("cache file has an unknown format version")
    try:
        primes = tuple(int(p) for p in lines[1].split()[1].split(","))
        mats = []
        i = 2
        while lines[i].startswith("brandt "):
            _, p, body = lines[i].split(" ", 2)
            rows = tuple(tuple(int(x) for x in r.split(",")) for r in body.split(";"))
            mats.append((int(p), rows))
            i += 1
        eigen = []
        while lines[i].startswith("eigen "):
            eigen.append([float(x) for x in lines[i].split()[1:]])
            i += 1
        table = ClassGroupTable.loads("\n".join(lines[i:]))
    except (IndexError, ValueError) as exc:
        raise CacheError(f"unreadable cache file: {exc}") from exc
    return table, primes, [BrandtMatrix(p, table.level, rows) for p, rows in mats], eigen


def load_context(
    level: int, primes: Sequence[int] | None = None, directory: str | Path | None = None
) -> tuple[ProtocolContext, bool]:
    """Build the protocol context, reading and writing the cache if a directory is given.

    Returns the context and whether the cache was hit.
    """
    directory = Path(directory) if directory is not None else default_cache_dir()
    if directory is None:
        return build_context(level, primes), False
    path = cache_path(directory, level, primes)
    if path.exists():
        table, resolved, mats, eigen = loads(path.read_text())
        if table.level != level:
            raise CacheError(f"cache file {path} holds level {table.level}")
        if any(s != m.p + 1 for m in mats for s in m.row_sums()):
            raise CacheError(f"cache file {path} has Brandt rows that do not sum to p + 1")
        ctx = build_context(table, resolved, brandt=mats)
        stored = np.array(eigen)
        if stored.shape != ctx.eigensystem.eigenvalue_vectors.shape or not np.allclose(
            stored, ctx.eigensystem.eigenvalue_vectors, atol=1e-9
        ):
            raise CacheError(f"cache file {path} disagrees with the recomputed eigensystem")
        return ctx, True
    ctx = build_context(level, primes)
    directory.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(dumps(ctx))
    tmp.replace(path)
    return ctx, False
