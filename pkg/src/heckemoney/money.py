"""Statevector simulation of the Hecke quantum-money protocol.

Notes live on pairs of class labels.  A state is an ``h x h`` complex matrix
``psi[i, j]`` holding the amplitude of ``|rep_i>|rep_j>``; operators on the
first factor act on rows, those on the second factor act on columns.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from functools import cached_property
from typing import Sequence

import numpy as np

from .hecke import (
    BrandtMatrix,
    EigenSystem,
    HeckeOperator,
    InsufficientSeparation,
    brandt_matrix,
    cusp_basis,
    default_primes,
    joint_eigensystem,
    restrict_and_symmetrize,
    weighted_ones,
)
from .ideals import (
    BOX_CONSTANT,
    CANON_RULE_VERSION,
    TABLE_FORMAT,
    ClassGroupTable,
    TripleCode,
    enumerate_classes,
    is_canonical_triple,
    triple_decode,
)
from .signing import DEFAULT_SCHEME, MintKeys, sign, verify_signature
from .wallet import Wallet

NORM_TOL = 1e-9
ACCEPTANCE_FLOOR = 1e-3
SERIAL_PLACES = 6
SERIAL_QUANTUM = Decimal(1).scaleb(-SERIAL_PLACES)
MIN_RESOLVABLE = 1e-6
BILL_VERSION = 1
EIGEN_TOL = 1e-7

FIRST, SECOND = "first", "second"


class ProtocolError(ValueError):
    pass


class ZeroNormError(ProtocolError):
    pass


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.ndim != 2 or amp.shape[0] != amp.shape[1]:
            raise ValueError("amplitudes must form a square matrix over class pairs")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def h(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self) -> bool:
        return abs(self.norm() - 1.0) <= NORM_TOL

    def fidelity(self, other: StateVector) -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def schmidt_coefficients(self) -> np.ndarray:
        return np.linalg.svd(self.amplitudes, compute_uv=False)

    @classmethod
    def normalized(cls, amp: np.ndarray) -> StateVector:
        n = np.linalg.norm(amp)
        if n < 1e-12:
            raise ZeroNormError("state has zero norm")
        return cls(amp / n)


def uniform_bell_state(h: int) -> StateVector:
    return StateVector(np.eye(h, dtype=complex) / math.sqrt(h))


# -- Bell preparation -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BellPreparation:
    state: StateVector
    acceptance: float
    raw_acceptance: float
    triples: tuple[TripleCode, ...]  # survivor of class i at position i
    box_size: int


def _box(level: int, c: int):
    """Yield ``(d, M_d)`` for every d whose box ``a, b <= M_d = floor(C sqrt(N) / d)`` is nonempty."""
    d = 1
    while d * d <= c * c * level:
        yield d, math.isqrt(c * c * level // (d * d))
        d += 1


def prepare_bell_state(table: ClassGroupTable, c: int = BOX_CONSTANT) -> BellPreparation:
    """Simulate the rejection cascade that prepares the uniform Bell state.

    d is drawn with probability proportional to 1/d^2, then a and b are uniform
    in ``[1, M_d]``.  A flattening step keeps each triple with probability
    ``(d M_d)^2 / (C^2 N)``, which makes every surviving amplitude equal.
    Rejections follow: ``a > b``, ``gcd(a, d, b) > 1``, ``gcd(m, N) > 1``, and
    triples that are not canonical.
    """
    level = table.level
    box = list(_box(level, c))
    z = sum(1.0 / (d * d) for d, _ in box)
    amps = np.zeros(table.h)
    triples: list[TripleCode | None] = [None] * table.h
    raw = 0.0
    size = 0
    for d, md in box:
        for b in range(1, md + 1):
            for a in range(1, b + 1):
                size += 1
                if math.gcd(a, d, b) != 1 or math.gcd(d * b, level) != 1:
                    continue
                code = TripleCode(d, a, b)
                if not is_canonical_triple(code, level):
                    continue
                pos = table.locate(triple_decode(code, level).lattice)
                if triples[pos] is not None:
                    raise ProtocolError(f"class {pos} has two canonical triples")
                triples[pos] = code
                amp = 1.0 / (math.sqrt(z) * d * md)
                raw += amp * amp
                amps[pos] = amp * d * md / (c * math.sqrt(level))
    if any(t is None for t in triples):
        raise ProtocolError("some class has no canonical triple in the box; raise C")
    acceptance = float(amps @ amps)
    if acceptance < ACCEPTANCE_FLOOR:
        raise ProtocolError(f"acceptance probability {acceptance:.2e} is below {ACCEPTANCE_FLOOR}")
    # copying the surviving register gives sum_i amp_i |i>|i>
    state = StateVector.normalized(np.diag(amps).astype(complex))
    return BellPreparation(state, acceptance, raw, tuple(triples), size)


# -- protocol context -------------------------------------------------------


def _resolvable(eps: float, nprimes: int) -> bool:
    rounding = 0.5 * 10.0**-SERIAL_PLACES * math.sqrt(nprimes)
    return eps / 3 >= MIN_RESOLVABLE and rounding < eps / 12


@dataclass(eq=False)
class ProtocolContext:
    table: ClassGroupTable
    brandt: tuple[BrandtMatrix, ...]
    operators: tuple[HeckeOperator, ...]
    eigensystem: EigenSystem
    _bell: BellPreparation | None = field(default=None, repr=False)

    @property
    def level(self) -> int:
        return self.table.level

    @property
    def primes(self) -> tuple[int, ...]:
        return self.eigensystem.primes

    @property
    def epsilon(self) -> float:
        """Minimum distance between phase vectors of distinct eigenstates.

        The Eisenstein line counts as an eigenstate here: it is what a note
        with weight outside V_N collapses to, and it keeps ε finite when V_N
        is one-dimensional.
        """
        eis = np.array([op.scale * (op.p + 1) for op in self.operators])
        gap = np.linalg.norm(self.phase_vectors - eis[None, :], axis=1).min()
        return float(min(self.eigensystem.phase_separation, gap))

    @property
    def dim(self) -> int:
        return self.eigensystem.dim

    @cached_property
    def cusp_embedding(self) -> np.ndarray:
        return cusp_basis(tuple(self.table.weights))

    @cached_property
    def eigenvectors(self) -> np.ndarray:
        """Joint eigenvectors as columns in class coordinates."""
        return self.cusp_embedding @ self.eigensystem.basis

    @cached_property
    def eisenstein(self) -> np.ndarray:
        return weighted_ones(self.table.weights)

    @cached_property
    def phase_vectors(self) -> np.ndarray:
        return self.eigensystem.phase_vectors

    @cached_property
    def version_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.table.dumps().encode())
        h.update(f"primes {','.join(map(str, self.primes))}\n".encode())
        h.update(f"{TABLE_FORMAT}|{CANON_RULE_VERSION}|bill v{BILL_VERSION}".encode())
        return h.hexdigest()[:32]

    @property
    def bell(self) -> BellPreparation:
        if self._bell is None:
            self._bell = prepare_bell_state(self.table)
        return self._bell

    def eigenvalue_groups(self, k: int) -> list[tuple[float, np.ndarray]]:
        """Eigenspaces of the k-th operator on the full class space.

        Each entry is (eigenvalue, matrix with orthonormal columns).  The
        Eisenstein line with eigenvalue p + 1 is included so that states with a
        component outside V_N still have a defined outcome law.
        """
        cached = self.__dict__.setdefault("_groups", {})
        if k not in cached:
            vals = self.eigensystem.eigenvalue_vectors[:, k]
            order = np.argsort(vals, kind="stable")
            groups: list[tuple[float, list[int]]] = []
            for i in order:
                if groups and abs(vals[i] - groups[-1][0]) <= EIGEN_TOL:
                    groups[-1][1].append(int(i))
                else:
                    groups.append((float(vals[i]), [int(i)]))
            out = [(lam, self.eigenvectors[:, idx]) for lam, idx in groups]
            out.append((float(self.primes[k] + 1), self.eisenstein[:, None]))
            cached[k] = out
        return cached[k]

    def serial_of(self, index: int) -> Serial:
        return Serial.from_phases(self.phase_vectors[index])


def build_context(
    level: int | ClassGroupTable,
    primes: Sequence[int] | None = None,
    brandt: Sequence[BrandtMatrix] | None = None,
    seed: int = 0,
    max_primes: int = 25,
) -> ProtocolContext:
    """Assemble everything the mint needs for one level.

    With ``primes=None`` the prime list starts at 2, 3, 5, 7 and grows until
    the eigenvalue vectors are separated well beyond the serial precision.
    """
    table = level if isinstance(level, ClassGroupTable) else enumerate_classes(level)
    known = {m.p: m for m in brandt or ()}
    auto = primes is None
    plist = default_primes(table.level, 4) if auto else list(primes)
    while True:
        mats = []
        for p in plist:
            if p not in known:
                known[p] = brandt_matrix(table, p)
            mats.append(known[p])
        ops = [restrict_and_symmetrize(m, table.weights) for m in mats]
        try:
            eig = joint_eigensystem(ops, seed=seed)
        except InsufficientSeparation:
            if not auto:
                raise
            eig = None
        if eig is not None:
            ctx = ProtocolContext(table, tuple(mats), tuple(ops), eig)
            if _resolvable(ctx.epsilon, len(plist)):
                return ctx
        if not auto:
            raise InsufficientSeparation(
                f"separation {ctx.epsilon:.3g} is too small for {SERIAL_PLACES}-place serials"
            )
        if len(plist) >= max_primes:
            raise InsufficientSeparation(f"no adequate separation with {max_primes} primes")
        plist = default_primes(table.level, len(plist) + 1)


# -- measurement -----------------------------------------------------------


def project_to_V(state: StateVector, ctx: ProtocolContext) -> StateVector:
    q = ctx.cusp_embedding
    proj = q @ q.T
    return StateVector.normalized(proj @ state.amplitudes @ proj.T)


def _branch(amp: np.ndarray, vecs: np.ndarray, side: str) -> np.ndarray:
    if side == FIRST:
        return vecs @ (vecs.T @ amp)
    if side == SECOND:
        return (amp @ vecs) @ vecs.T
    raise ValueError(f"side must be {FIRST!r} or {SECOND!r}")


def phase_estimate(
    ctx: ProtocolContext, k: int, state: StateVector, side: str, rng: np.random.Generator
) -> tuple[Decimal, StateVector]:
    """Ideal phase estimation of the k-th Hecke operator on one tensor factor."""
    amp = state.amplitudes
    groups = ctx.eigenvalue_groups(k)
    branches = [_branch(amp, vecs, side) for _, vecs in groups]
    probs = np.array([np.vdot(b, b).real for b in branches])
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise ProtocolError(f"outcome probabilities sum to {total}")
    idx = int(rng.choice(len(groups), p=probs / total))
    phase = quantize(ctx.operators[k].scale * groups[idx][0])
    return phase, StateVector.normalized(branches[idx])


def quantize(x: float) -> Decimal:
    return Decimal(repr(float(x))).quantize(SERIAL_QUANTUM)


# -- serials and bills -----------------------------------------------------


@dataclass(frozen=True)
class Serial:
    phases: tuple[Decimal, ...]

    @classmethod
    def from_phases(cls, values) -> Serial:
        return cls(tuple(quantize(v) for v in values))

    @classmethod
    def parse(cls, strings: Sequence[str]) -> Serial:
        vals = tuple(Decimal(s) for s in strings)
        if any(v != v.quantize(SERIAL_QUANTUM) for v in vals):
            raise ProtocolError("serial entries must have at most six decimal places")
        return cls(tuple(v.quantize(SERIAL_QUANTUM) for v in vals))

    def strings(self) -> list[str]:
        return [str(v) for v in self.phases]

    def array(self) -> np.ndarray:
        return np.array([float(v) for v in self.phases])

    def distance(self, other: Serial | np.ndarray) -> float:
        o = other.array() if isinstance(other, Serial) else np.asarray(other, dtype=float)
        return float(np.linalg.norm(self.array() - o))


@dataclass(frozen=True)
class Bill:
    level: int
    primes: tuple[int, ...]
    basis: str
    serial: Serial
    signature: bytes
    note_id: str

    def signed_fields(self) -> dict:
        return {
            "basis": self.basis,
            "level": self.level,
            "primes": list(self.primes),
            "serial": self.serial.strings(),
            "version": BILL_VERSION,
        }

    def message(self) -> bytes:
        return _canonical(self.signed_fields()).encode("utf-8")

    def dumps(self) -> str:
        doc = self.signed_fields()
        doc["note_id"] = self.note_id
        doc["signature"] = self.signature.hex()
        return _canonical(doc) + "\n"

    @classmethod
    def loads(cls, text: str) -> Bill:
        try:
            doc = json.loads(text)
            if doc["version"] != BILL_VERSION:
                raise ProtocolError(f"unsupported bill version {doc['version']}")
            sig = doc["signature"]
            if sig != sig.lower():
                raise ProtocolError("signature hex must be lowercase")
            return cls(
                int(doc["level"]),
                tuple(int(p) for p in doc["primes"]),
                str(doc["basis"]),
                Serial.parse(doc["serial"]),
                bytes.fromhex(sig),
                str(doc["note_id"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ProtocolError):
                raise
            raise ProtocolError(f"malformed bill: {exc}") from exc

    def with_serial(self, serial: Serial) -> Bill:
        return Bill(self.level, self.primes, self.basis, serial, self.signature, self.note_id)

    def with_signature(self, sig: bytes) -> Bill:
        return Bill(self.level, self.primes, self.basis, self.serial, sig, self.note_id)


def _canonical(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


# -- mint and verify -------------------------------------------------------


def _measure_all(ctx, state, side, rng):
    phases = []
    for k in range(len(ctx.primes)):
        ph, state = phase_estimate(ctx, k, state, side, rng)
        phases.append(ph)
    return Serial(tuple(phases)), state


def mint_state(ctx: ProtocolContext, rng: np.random.Generator, rounding: str = "canonical") -> tuple[Serial, StateVector]:
    """Prepare a note and measure its serial without signing it.

    ``rounding="approximate"`` perturbs the measured phases by less than ε/6
    before rounding, so serials are approximations rather than a function of
    the eigenstate.
    """
    state = project_to_V(ctx.bell.state, ctx)
    serial, state = _measure_all(ctx, state, FIRST, rng)
    if rounding == "approximate":
        k = len(serial.phases)
        offset = rng.uniform(-1.0, 1.0, size=k) * ctx.epsilon / (6 * math.sqrt(k)) * 0.999
        serial = Serial.from_phases(serial.array() + offset)
    elif rounding != "canonical":
        raise ValueError(f"unknown rounding mode {rounding!r}")
    return serial, state


def mint(
    ctx: ProtocolContext,
    keys: MintKeys,
    wallet: Wallet,
    rng: np.random.Generator,
    rounding: str = "canonical",
) -> Bill:
    serial, state = mint_state(ctx, rng, rounding)
    note_id = wallet.deposit(state.amplitudes)
    unsigned = Bill(ctx.level, ctx.primes, ctx.version_hash, serial, b"", note_id)
    return unsigned.with_signature(sign(unsigned.message(), keys))


@dataclass(frozen=True, eq=False)
class Verdict:
    accepted: bool
    reason: str
    state: StateVector | None
    measured: tuple[Serial, Serial] | None = None

    def __bool__(self) -> bool:
        return self.accepted


def verify_state(ctx: ProtocolContext, serial: Serial, state: StateVector, rng: np.random.Generator) -> Verdict:
    """Phase-estimate both factors at every prime and compare with the serial."""
    if len(serial.phases) != len(ctx.primes):
        return Verdict(False, "serial length does not match the prime list", state)
    first, state = _measure_all(ctx, state, FIRST, rng)
    second, state = _measure_all(ctx, state, SECOND, rng)
    window = ctx.epsilon / 2
    ok = serial.distance(first) < window and serial.distance(second) < window
    return Verdict(ok, "accepted" if ok else "phase mismatch", state, (first, second))


def verify(
    ctx: ProtocolContext,
    bill: Bill,
    verification_key: bytes,
    wallet: Wallet,
    rng: np.random.Generator,
    scheme: str = DEFAULT_SCHEME,
) -> Verdict:
    if (bill.level, bill.primes, bill.basis) != (ctx.level, ctx.primes, ctx.version_hash):
        return Verdict(False, "bill was minted under a different protocol context", None)
    if not verify_signature(bill.message(), bill.signature, verification_key, scheme):
        return Verdict(False, "bad signature", None)
    with wallet.checkout(bill.note_id) as note:
        verdict = verify_state(ctx, bill.serial, StateVector(note.amplitudes), rng)
        note.amplitudes = verdict.state.amplitudes
    return verdict
