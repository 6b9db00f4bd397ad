import json
import math
from collections import Counter
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import context_for
from heckemoney.ideals import BOX_CONSTANT
from heckemoney.money import (
    FIRST,
    SECOND,
    Bill,
    ProtocolError,
    Serial,
    StateVector,
    ZeroNormError,
    _box,
    _resolvable,
    mint,
    mint_state,
    phase_estimate,
    prepare_bell_state,
    project_to_V,
    uniform_bell_state,
    verify,
    verify_state,
)
from heckemoney.signing import generate_keys, sign
from heckemoney.wallet import Wallet

KEYS = generate_keys(b"tests")


def wallet_for(ctx):
    return Wallet(ctx.level, ctx.version_hash, ctx.table.h)


def eigen_note(ctx, k):
    v = ctx.eigenvectors[:, k]
    return StateVector(np.outer(v, v))


def test_box_respects_bound():
    for level in (11, 599):
        for d, md in _box(level, BOX_CONSTANT):
            assert d * md <= BOX_CONSTANT * math.sqrt(level)
            assert (d * (md + 1)) > BOX_CONSTANT * math.sqrt(level)
        dmax = max(d for d, _ in _box(level, BOX_CONSTANT))
        assert dmax <= BOX_CONSTANT * math.sqrt(level) < dmax + 1


@pytest.mark.parametrize("level", [11, 23, 47])
def test_bell_preparation(level):
    ctx = context_for(level)
    prep = prepare_bell_state(ctx.table)
    assert 1e-3 <= prep.acceptance <= 1
    assert prep.acceptance <= prep.raw_acceptance
    assert np.abs(prep.state.amplitudes - uniform_bell_state(ctx.table.h).amplitudes).max() <= 1e-9
    assert len(prep.triples) == ctx.table.h
    assert prep.state.is_normalized()


def test_project_level_23(ctx23):
    state = project_to_V(ctx23.bell.state, ctx23)
    coeffs = state.schmidt_coefficients()
    assert np.sum(coeffs > 1e-9) == 2
    assert np.allclose(coeffs[:2], 1 / math.sqrt(2), atol=1e-12)
    assert project_to_V(state, ctx23).fidelity(state) == pytest.approx(1, abs=1e-12)


def test_project_rejects_eisenstein(ctx23):
    u = ctx23.eisenstein
    with pytest.raises(ZeroNormError):
        project_to_V(StateVector(np.outer(u, u)), ctx23)


def test_phase_estimate_level_11(ctx11):
    state = project_to_V(ctx11.bell.state, ctx11)
    rng = np.random.default_rng(0)
    phase, post = phase_estimate(ctx11, 0, state, FIRST, rng)
    assert ctx11.primes[0] == 2
    assert phase == Decimal("-0.333333")
    assert post.fidelity(state) == pytest.approx(1, abs=1e-12)


def test_phase_estimate_on_eigenstate(ctx23):
    rng = np.random.default_rng(1)
    for k in range(ctx23.dim):
        note = eigen_note(ctx23, k)
        for side in (FIRST, SECOND):
            for j in range(len(ctx23.primes)):
                phase, post = phase_estimate(ctx23, j, note, side, rng)
                assert phase == ctx23.serial_of(k).phases[j]
                assert post.fidelity(note) == pytest.approx(1, abs=1e-12)


def test_phase_estimate_bell_statistics(ctx23):
    state = project_to_V(ctx23.bell.state, ctx23)
    rng = np.random.default_rng(2)
    counts = Counter(phase_estimate(ctx23, 0, state, FIRST, rng)[0] for _ in range(1000))
    assert len(counts) == 2
    assert all(abs(c / 1000 - 0.5) <= 0.05 for c in counts.values())


def test_phase_estimate_bad_side(ctx23):
    with pytest.raises(ValueError):
        phase_estimate(ctx23, 0, eigen_note(ctx23, 0), "third", np.random.default_rng(0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_norm_preserved(seed):
    ctx = context_for(23)
    rng = np.random.default_rng(seed)
    amp = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    state = StateVector.normalized(amp)
    assert state.is_normalized()
    for side in (FIRST, SECOND):
        for k in range(len(ctx.primes)):
            _, state = phase_estimate(ctx, k, state, side, rng)
            assert state.is_normalized()


def test_mint_level_11(ctx11):
    wallet = wallet_for(ctx11)
    rng = np.random.default_rng(3)
    serials = {mint(ctx11, KEYS, wallet, rng).serial for _ in range(20)}
    assert serials == {ctx11.serial_of(0)}


def test_mint_level_23_frequencies(ctx23):
    wallet = wallet_for(ctx23)
    rng = np.random.default_rng(4)
    counts = Counter(mint(ctx23, KEYS, wallet, rng).serial for _ in range(200))
    assert set(counts) == {ctx23.serial_of(0), ctx23.serial_of(1)}
    assert all(abs(c / 200 - 0.5) <= 0.1 for c in counts.values())


@pytest.mark.parametrize("level", [11, 23, 71])
def test_fresh_bills_verify(level):
    ctx = context_for(level)
    wallet = wallet_for(ctx)
    rng = np.random.default_rng(level)
    for _ in range(10):
        bill = mint(ctx, KEYS, wallet, rng)
        with wallet.checkout(bill.note_id) as note:
            before = StateVector(note.amplitudes)
        first = verify(ctx, bill, KEYS.verification_key, wallet, rng)
        assert first, first.reason
        assert first.state.fidelity(before) >= 1 - 1e-9
        again = verify(ctx, bill, KEYS.verification_key, wallet, rng)
        assert again and again.state.fidelity(first.state) >= 1 - 1e-9


def test_perturbed_serial_rejects(ctx23):
    wallet = wallet_for(ctx23)
    rng = np.random.default_rng(5)
    bill = mint(ctx23, KEYS, wallet, rng)
    shifted = Serial.from_phases(bill.serial.array() + np.eye(len(ctx23.primes))[0] * ctx23.epsilon)
    forged = bill.with_serial(shifted)
    forged = forged.with_signature(sign(forged.message(), KEYS))
    assert not verify(ctx23, forged, KEYS.verification_key, wallet, rng)


def test_tampering_rejects(ctx23):
    wallet = wallet_for(ctx23)
    rng = np.random.default_rng(6)
    bill = mint(ctx23, KEYS, wallet, rng)
    sig = bytearray(bill.signature)
    sig[0] ^= 1
    assert verify(ctx23, bill.with_signature(bytes(sig)), KEYS.verification_key, wallet, rng).reason == "bad signature"
    other = ctx23.serial_of(1) if bill.serial == ctx23.serial_of(0) else ctx23.serial_of(0)
    assert not verify(ctx23, bill.with_serial(other), KEYS.verification_key, wallet, rng)
    assert verify(ctx23, bill, KEYS.verification_key, wallet, rng)


def test_serial_separation():
    for level in (11, 23, 47, 71):
        ctx = context_for(level)
        eps = ctx.epsilon
        serials = [ctx.serial_of(k) for k in range(ctx.dim)]
        for k, s in enumerate(serials):
            assert s.distance(ctx.phase_vectors[k]) < eps / 3
            for t in serials[k + 1:]:
                assert s.distance(t) > eps / 2 + eps / 3


def test_approximate_rounding(ctx23):
    wallet = wallet_for(ctx23)
    rng = np.random.default_rng(7)
    for _ in range(20):
        bill = mint(ctx23, KEYS, wallet, rng, rounding="approximate")
        assert min(bill.serial.distance(v) for v in ctx23.phase_vectors) < ctx23.epsilon / 3
        assert verify(ctx23, bill, KEYS.verification_key, wallet, rng)
    with pytest.raises(ValueError):
        mint_state(ctx23, rng, rounding="floor")


def test_random_note_acceptance(ctx23):
    rng = np.random.default_rng(8)
    serial = ctx23.serial_of(0)
    hits = 0
    for _ in range(400):
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        q = ctx23.cusp_embedding
        hits += bool(verify_state(ctx23, serial, StateVector.normalized(q @ g @ q.T), rng))
    assert abs(hits / 400 - 0.25) <= 0.1


def test_bill_format(ctx23):
    wallet = wallet_for(ctx23)
    bill = mint(ctx23, KEYS, wallet, np.random.default_rng(9))
    text = bill.dumps()
    assert Bill.loads(text) == bill
    assert b"note_id" not in bill.message()
    assert list(json.loads(text)) == sorted(json.loads(text))
    assert all(len(s.split(".")[1]) == 6 for s in bill.serial.strings())
    assert bill.signature.hex() in text
    with pytest.raises(ProtocolError):
        Bill.loads("{}")
    with pytest.raises(ProtocolError):
        Bill.loads(text.replace('"version":1', '"version":9'))
    with pytest.raises(ProtocolError):
        Bill.loads(text.replace(bill.signature.hex(), bill.signature.hex().upper()))
    with pytest.raises(ProtocolError):
        Serial.parse(["0.1234567"])


def test_context_mismatch_rejects(ctx23, ctx11):
    wallet = wallet_for(ctx23)
    bill = mint(ctx23, KEYS, wallet, np.random.default_rng(10))
    assert verify(ctx11, bill, KEYS.verification_key, wallet, np.random.default_rng(0)).reason.startswith("bill was minted")


def test_context_primes(ctx599):
    assert ctx599.primes[:4] == (2, 3, 5, 7)
    assert _resolvable(ctx599.epsilon, len(ctx599.primes))
    assert not _resolvable(1e-7, 4)
    assert ctx599.dim == ctx599.table.h - 1 == 50
