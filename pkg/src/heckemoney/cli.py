"""Command-line front end: ``heckemoney {inspect,mint,verify,attack,selftest}``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import attacks, cache, oracles
from .hecke import InsufficientSeparation, WeightedSymmetryError, brandt_matrix, joint_eigensystem, restrict_and_symmetrize
from .ideals import EnumerationError, enumerate_classes
from .money import Bill, ProtocolError, mint, verify
from .quaternion import ParameterError
from .signing import DEFAULT_SCHEME, MalformedKey, MintKeys, generate_keys
from .wallet import Wallet, WalletError

EXIT_OK, EXIT_REJECT, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _primes(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        out = [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad prime list {text!r}") from exc
    if not out:
        raise argparse.ArgumentTypeError("empty prime list")
    return out


def _context(level, primes, cache_dir):
    ctx, hit = cache.load_context(level, primes, cache_dir)
    if cache_dir is not None or cache.default_cache_dir() is not None:
        print(f"cache {'hit' if hit else 'miss'}", file=sys.stderr)
    return ctx


def _fmt(x: float) -> str:
    return f"{x:.9f}"


def cmd_inspect(args) -> int:
    ctx = _context(args.level, args.primes, args.cache)
    table = ctx.table
    mass, expected = oracles.mass_identity(table)
    print(f"level {table.level}")
    print(f"classes {table.h}")
    print(f"dim {ctx.dim}")
    print(f"weights {' '.join(map(str, table.weights))}")
    print(f"mass {mass} expected {expected} {'ok' if mass == expected else 'MISMATCH'}")
    for m in ctx.brandt:
        print(f"brandt {m.p}")
        for row in m.entries:
            print("  " + " ".join(f"{x:3d}" for x in row))
    print(f"primes {' '.join(map(str, ctx.primes))}")
    for vec in ctx.eigensystem.eigenvalue_vectors:
        print("eigenvalues " + " ".join(_fmt(v) for v in vec))
    print(f"epsilon {_fmt(ctx.epsilon)}")
    return EXIT_OK if mass == expected else EXIT_INVARIANT


def _keys_path(args) -> Path:
    return Path(args.keys) if args.keys else Path(str(args.wallet) + ".keys")


def _load_keys(path: Path) -> MintKeys:
    try:
        doc = json.loads(path.read_text())
        return MintKeys(doc["scheme"], bytes.fromhex(doc["signing_key"]), bytes.fromhex(doc["verification_key"]))
    except FileNotFoundError as exc:
        raise UsageError(f"key file {path} not found") from exc
    except (KeyError, ValueError) as exc:
        raise UsageError(f"malformed key file {path}: {exc}") from exc


def _save_keys(path: Path, keys: MintKeys) -> None:
    doc = {"scheme": keys.scheme, "signing_key": keys.signing_key.hex(), "verification_key": keys.verification_key.hex()}
    path.write_text(json.dumps(doc, sort_keys=True) + "\n")


def _open_wallet(path: Path, ctx) -> Wallet:
    if not path.exists():
        return Wallet(ctx.level, ctx.version_hash, ctx.table.h)
    wallet = Wallet.load(path)
    if (wallet.level, wallet.basis) != (ctx.level, ctx.version_hash):
        raise UsageError("wallet was written under a different protocol context (version hash mismatch)")
    return wallet


def cmd_mint(args) -> int:
    ctx = _context(args.level, args.primes, args.cache)
    kpath = _keys_path(args)
    if kpath.exists():
        keys = _load_keys(kpath)
    else:
        keys = generate_keys(args.seed.to_bytes(8, "big", signed=True), args.scheme)
        _save_keys(kpath, keys)
    wallet_path = Path(args.wallet)
    wallet = _open_wallet(wallet_path, ctx)
    rng = np.random.default_rng([args.seed, len(wallet)])
    bill = mint(ctx, keys, wallet, rng, rounding=args.rounding)
    Path(args.bill).write_text(bill.dumps())
    wallet.save(wallet_path)
    print(f"minted {bill.note_id} serial {' '.join(bill.serial.strings())}")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        bill = Bill.loads(Path(args.bill).read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"bill file {args.bill} not found") from exc
    wallet_path = Path(args.wallet)
    if not wallet_path.exists():
        raise UsageError(f"wallet file {wallet_path} not found")
    wallet = Wallet.load(wallet_path)
    if wallet.basis != bill.basis or wallet.level != bill.level:
        raise UsageError("bill and wallet disagree on the protocol version hash")
    ctx = _context(bill.level, list(bill.primes), args.cache)
    if ctx.version_hash != bill.basis:
        raise UsageError("bill was minted under a different protocol context (version hash mismatch)")
    if bill.note_id not in wallet:
        raise UsageError(f"wallet holds no note {bill.note_id}")
    keys = _load_keys(_keys_path(args))
    rng = np.random.default_rng([args.seed, 1])
    verdict = verify(ctx, bill, keys.verification_key, wallet, rng, keys.scheme)
    wallet.save(wallet_path)
    print(f"{'accept' if verdict else 'reject'}: {verdict.reason}")
    return EXIT_OK if verdict else EXIT_REJECT


def cmd_attack(args) -> int:
    ctx = _context(args.level, args.primes, args.cache)
    budget = args.budget if args.budget is not None else math.floor(4 * math.sqrt(ctx.dim))
    report = attacks.birthday_attack(ctx, budget, trials=args.trials, seed=args.seed)
    sys.stdout.write(report.dumps())
    if report.min_fidelity < 1 - attacks.FIDELITY_TOL:
        return EXIT_INVARIANT
    failed = report.successes == 0 or (args.min_rate is not None and report.success_rate < args.min_rate)
    return EXIT_REJECT if failed else EXIT_OK


def _selftest_checks():
    def level11():
        table = enumerate_classes(11)
        assert sorted(table.weights) == [4, 6]
        for p in (2, 3, 5, 7, 13):
            a_p = oracles.eta_product_ap(p)
            assert a_p == oracles.ec_point_count_ap(p)
            op = restrict_and_symmetrize(brandt_matrix(table, p), table.weights)
            assert round(float(op.matrix[0, 0])) == a_p and abs(op.matrix[0, 0] - a_p) < 1e-9

    def structure():
        for n in (11, 19, 23, 31, 43):
            table = enumerate_classes(n)
            assert oracles.mass_identity(table)[0] == Fraction(n - 1, 24)
            mats = {p: brandt_matrix(table, p) for p in (2, 3, 5, 7)}
            for p, m in mats.items():
                assert m.row_sums() == [p + 1] * table.h
                assert m.weighted_symmetric(table.weights)
                for q in mats:
                    assert (m @ mats[q]) == (mats[q] @ m)
            ops = [restrict_and_symmetrize(m, table.weights) for m in mats.values()]
            assert all(op.ramanujan_ok() for op in ops)
            assert abs(table.h - 1 - n / 12) <= 1

    def protocol():
        ctx, _ = cache.load_context(23, None, None)
        keys = generate_keys(b"selftest")
        wallet = Wallet(ctx.level, ctx.version_hash, ctx.table.h)
        rng = np.random.default_rng(0)
        for _ in range(20):
            bill = mint(ctx, keys, wallet, rng)
            v1 = verify(ctx, bill, keys.verification_key, wallet, rng)
            v2 = verify(ctx, bill, keys.verification_key, wallet, rng)
            assert v1 and v2 and v1.state.fidelity(v2.state) >= 1 - 1e-9
            assert not verify(ctx, bill.with_signature(bytes(32)), keys.verification_key, wallet, rng)

    def claim1():
        for n in (2, 4):
            est = attacks.triorthogonality_experiment(n, 500, seed=n)
            assert est.mean <= 3 / n + 3 * est.std_error

    return [("level-11 oracles", level11), ("structural identities", structure),
            ("protocol soundness", protocol), ("triorthogonality bound", claim1)]


def cmd_selftest(args) -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            check()
        except Exception as exc:  # report every failing check, not just the first
            failures += 1
            print(f"FAIL {name}: {type(exc).__name__}: {exc}")
        else:
            print(f"PASS {name}")
    return EXIT_INVARIANT if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heckemoney", description="Quantum money from Hecke operators, simulated.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, level=True):
        if level:
            p.add_argument("--level", type=int, required=True, help="prime N = 3 mod 4")
            p.add_argument("--primes", type=_primes, default=None, help="comma-separated Hecke primes")
        p.add_argument("--cache", default=None, help=f"cache directory (default: ${cache.CACHE_ENV})")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("inspect", help="class set, Brandt matrices and eigenvalues")
    common(p)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("mint", help="mint a bill into a wallet")
    common(p)
    p.add_argument("--wallet", required=True)
    p.add_argument("--bill", required=True)
    p.add_argument("--keys", default=None, help="mint key file (default: WALLET.keys)")
    p.add_argument("--scheme", default=DEFAULT_SCHEME, choices=["hmac-sha256", "ed25519"])
    p.add_argument("--rounding", default="canonical", choices=["canonical", "approximate"])
    p.set_defaults(func=cmd_mint)

    p = sub.add_parser("verify", help="verify a bill against its wallet note")
    common(p, level=False)
    p.add_argument("--wallet", required=True)
    p.add_argument("--bill", required=True)
    p.add_argument("--keys", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("attack", help="birthday attack on serial numbers")
    common(p)
    p.add_argument("--budget", type=int, default=None, help="bills per trial (default: 4 sqrt(dim))")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--min-rate", type=float, default=None, help="exit 1 if the success rate is lower")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("selftest", help="run oracle and invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ParameterError, ProtocolError, WalletError, MalformedKey, cache.CacheError,
            InsufficientSeparation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AssertionError, ArithmeticError, EnumerationError, WeightedSymmetryError) as exc:
        print(f"invariant violation: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
