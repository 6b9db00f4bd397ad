import copy
import pickle
import threading

import numpy as np
import pytest

from heckemoney.wallet import NoCloning, StaleHandle, Wallet, WalletError


def note(h=3, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((h, h)) + 1j * rng.standard_normal((h, h))
    return a / np.linalg.norm(a)


def make(basis="abc"):
    return Wallet(23, basis, 3)


def test_transfer_invalidates_source():
    src, dst = make(), make()
    nid = src.deposit(note())
    handle = src.handle(nid)
    assert handle.valid
    moved = src.transfer(handle, dst)
    assert not handle.valid
    assert moved.valid and moved.note_id in dst
    assert nid not in src
    with pytest.raises(StaleHandle):
        src.take(handle)
    with pytest.raises(KeyError):
        src.take(nid)


def test_take_is_destructive():
    w = make()
    amp = note()
    nid = w.deposit(amp)
    assert np.array_equal(w.take(nid), amp)
    assert len(w) == 0


@pytest.mark.parametrize("clone", [copy.copy, copy.deepcopy, pickle.dumps])
def test_handles_and_wallets_refuse_cloning(clone):
    w = make()
    handle = w.handle(w.deposit(note()))
    with pytest.raises(NoCloning):
        clone(handle)
    with pytest.raises(NoCloning):
        clone(w)


def test_handle_from_other_wallet():
    a, b = make(), make()
    handle = a.handle(a.deposit(note()))
    with pytest.raises(WalletError):
        b.take(handle)


def test_transfer_checks_context():
    a, b = make("abc"), make("xyz")
    nid = a.deposit(note())
    with pytest.raises(WalletError):
        a.transfer(nid, b)
    assert nid in a
    with pytest.raises(WalletError):
        a.transfer(nid, a)


def test_rejects_bad_notes():
    w = make()
    with pytest.raises(WalletError):
        w.deposit(np.eye(2))
    with pytest.raises(WalletError):
        w.deposit(2 * note())
    nid = w.deposit(note())
    with pytest.raises(WalletError):
        with w.checkout(nid) as view:
            view.amplitudes = view.amplitudes * 3


def test_file_round_trip(tmp_path):
    w = make()
    ids = [w.deposit(note(seed=s)) for s in range(3)]
    path = tmp_path / "wallet.json"
    w.save(path)
    back = Wallet.load(path)
    assert back.note_ids() == ids
    for nid, s in zip(ids, range(3)):
        assert np.array_equal(back.take(nid), note(seed=s))
    assert back.deposit(note()) not in ids
    text = path.read_text()
    assert '"format": "heckemoney-wallet v1"' in text
    with pytest.raises(WalletError):
        Wallet.loads(text.replace("heckemoney-wallet v1", "other"))


def test_concurrent_deposits_get_unique_ids():
    w = Wallet(23, "abc", 3)
    out = []

    def work(seed):
        for k in range(50):
            out.append(w.deposit(note(seed=seed * 100 + k)))

    threads = [threading.Thread(target=work, args=(s,)) for s in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(out)) == len(out) == len(w) == 200
