"""The birthday attack on serial numbers and the triorthogonality experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .money import ProtocolContext, Serial, StateVector, mint, verify, verify_state
from .signing import MintKeys, generate_keys
from .wallet import Wallet

REPORT_FORMAT = "heckemoney-attack v1"
FIDELITY_TOL = 1e-9


@dataclass(frozen=True)
class Collision:
    trial: int
    first: str
    second: str
    distance: float
    fidelity: float


@dataclass
class AttackReport:
    level: int
    budget: int
    trials: int
    seed: int
    epsilon: float
    successes: int = 0
    collisions: list[Collision] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not 0 <= self.successes <= self.trials:
            raise ValueError("successes must lie in [0, trials]")

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def min_fidelity(self) -> float:
        return min((c.fidelity for c in self.collisions), default=1.0)

    def dumps(self) -> str:
        lines = [
            REPORT_FORMAT,
            f"level {self.level}",
            f"budget {self.budget}",
            f"trials {self.trials}",
            f"seed {self.seed}",
            f"epsilon {self.epsilon:.17g}",
            f"successes {self.successes}",
            f"success_rate {self.success_rate:.6f}",
            f"collisions {len(self.collisions)}",
            f"min_fidelity {self.min_fidelity:.17g}",
        ]
        for c in self.collisions:
            lines.append(f"collision {c.trial} {c.first} {c.second} {c.distance:.9f} {c.fidelity:.17g}")
        return "\n".join(lines) + "\n"


def birthday_bound(budget: int, dim: int) -> float:
    """Probability that ``budget`` uniform draws from ``dim`` outcomes repeat."""
    if budget > dim:
        return 1.0
    return 1.0 - math.prod(1.0 - k / dim for k in range(budget))


def birthday_attack(
    ctx: ProtocolContext,
    budget: int,
    trials: int = 1,
    seed: int = 0,
    keys: MintKeys | None = None,
) -> AttackReport:
    """Mint ``budget`` bills per trial and collect pairs with serials within ε/2.

    Each colliding pair is run through verification and the two post-states
    are compared; equal serials should mean equal eigenstates.
    """
    if budget < 0 or trials < 1:
        raise ValueError("budget must be nonnegative and trials positive")
    keys = keys or generate_keys(seed.to_bytes(8, "big", signed=True))
    window = ctx.epsilon / 2
    report = AttackReport(ctx.level, budget, trials, seed, ctx.epsilon)
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        wallet = Wallet(ctx.level, ctx.version_hash, ctx.table.h)
        bills = sorted((mint(ctx, keys, wallet, rng) for _ in range(budget)), key=lambda b: b.serial.phases)
        found = False
        for i in range(len(bills)):
            for j in range(i + 1, len(bills)):
                dist = bills[i].serial.distance(bills[j].serial)
                if dist > window:
                    continue
                states = []
                for b in (bills[i], bills[j]):
                    verdict = verify(ctx, b, keys.verification_key, wallet, rng, keys.scheme)
                    if not verdict:
                        raise AssertionError(f"freshly minted bill failed verification: {verdict.reason}")
                    states.append(verdict.state)
                fid = states[0].fidelity(states[1])
                report.collisions.append(Collision(t, bills[i].note_id, bills[j].note_id, dist, fid))
                found = True
        report.successes += found
    return report


def random_note(ctx: ProtocolContext, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state on V_N x V_N, embedded in the class-pair space."""
    d = ctx.dim
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q = ctx.cusp_embedding
    return StateVector.normalized(q @ g @ q.T)


def forgery_rate(ctx: ProtocolContext, serial: Serial, trials: int, seed: int = 0) -> float:
    """Fraction of random notes that pass verification against ``serial``.

    Averaging over Haar-random notes is the same as verifying the maximally
    mixed state, so the expected rate for a single eigenstate's serial is
    ``1 / dim^2``.
    """
    rng = np.random.default_rng(seed)
    accepted = sum(bool(verify_state(ctx, serial, random_note(ctx, rng), rng)) for _ in range(trials))
    return accepted / trials


class Estimate(NamedTuple):
    mean: float
    std_error: float


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


def haar_state(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z)


def diagonal_weight(phi: np.ndarray, basis: np.ndarray) -> float:
    """``sum_i |<u_i u_i u_i | phi>|^2`` for the columns ``u_i`` of ``basis``."""
    c = basis.conj()
    amps = np.einsum("ai,bi,ci,abc->i", c, c, c, phi)
    return float(np.sum(np.abs(amps) ** 2))


def triorthogonality_experiment(dim: int, trials: int, seed: int = 0, mode: str = "random") -> Estimate:
    """Mean and standard error of the diagonal weight over random bases.

    ``mode="random"`` also draws phi from the Haar measure on W x W x W;
    ``mode="fixed"`` uses phi = e_1 x e_1 x e_1.
    """
    if dim < 1 or trials < 1:
        raise ValueError("dim and trials must be positive")
    if mode not in ("random", "fixed"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    fixed = np.zeros((dim, dim, dim), dtype=complex)
    fixed[0, 0, 0] = 1.0
    vals = np.empty(trials)
    for t in range(trials):
        phi = haar_state((dim, dim, dim), rng) if mode == "random" else fixed
        vals[t] = diagonal_weight(phi, haar_unitary(dim, rng))
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return Estimate(float(vals.mean()), se)
