"""Single-owner storage for simulated notes.

A note's amplitudes never leave the store by value except through ``take``,
which removes them.  Handles cannot be copied or pickled, and the store itself
refuses to be copied, so the simulation cannot clone a note by accident.
"""

from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from pathlib import Path

import numpy as np

WALLET_FORMAT = "heckemoney-wallet v1"


class WalletError(RuntimeError):
    pass


class StaleHandle(WalletError):
    """The note behind this handle was transferred or taken."""


class NoCloning(TypeError):
    pass


class NoteHandle:
    __slots__ = ("_wallet", "_note_id", "_serial")

    def __init__(self, wallet: Wallet, note_id: str, serial: int) -> None:
        self._wallet = wallet
        self._note_id = note_id
        self._serial = serial

    @property
    def note_id(self) -> str:
        return self._note_id

    @property
    def valid(self) -> bool:
        return self._wallet._live.get(self._note_id) == self._serial

    def _check(self) -> None:
        if not self.valid:
            raise StaleHandle(f"note {self._note_id} is no longer held by this handle")

    def __copy__(self):
        raise NoCloning("note handles cannot be copied")

    def __deepcopy__(self, memo):
        raise NoCloning("note handles cannot be copied")

    def __reduce__(self):
        raise NoCloning("note handles cannot be pickled")

    def __repr__(self) -> str:
        return f"NoteHandle({self._note_id!r}, valid={self.valid})"


class _Checkout:
    """Mutable view of one note, valid only inside ``Wallet.checkout``."""

    def __init__(self, amplitudes: np.ndarray) -> None:
        self.amplitudes = amplitudes


class Wallet:
    def __init__(self, level: int, basis: str, dim: int) -> None:
        self.level = level
        self.basis = basis
        self.dim = dim
        self._notes: dict[str, np.ndarray] = {}
        self._live: dict[str, int] = {}
        self._issued = 0
        self._lock = threading.RLock()

    def __copy__(self):
        raise NoCloning("wallets cannot be copied")

    def __deepcopy__(self, memo):
        raise NoCloning("wallets cannot be copied")

    def __reduce__(self):
        raise NoCloning("wallets are persisted with save(), not pickled")

    def __len__(self) -> int:
        return len(self._notes)

    def __contains__(self, note_id: str) -> bool:
        return note_id in self._notes

    def note_ids(self) -> list[str]:
        return sorted(self._notes)

    def _check_amplitudes(self, amp) -> np.ndarray:
        amp = np.array(amp, dtype=complex)
        if amp.shape != (self.dim, self.dim):
            raise WalletError(f"note has shape {amp.shape}, wallet holds {self.dim} x {self.dim}")
        if abs(np.linalg.norm(amp) - 1.0) > 1e-9:
            raise WalletError("notes must have unit norm")
        return amp

    def deposit(self, amplitudes) -> str:
        amp = self._check_amplitudes(amplitudes)
        with self._lock:
            self._issued += 1
            note_id = f"note-{self._issued:06d}"
            while note_id in self._notes:
                self._issued += 1
                note_id = f"note-{self._issued:06d}"
            self._notes[note_id] = amp
            self._live[note_id] = self._issued
            return note_id

    def handle(self, note_id: str) -> NoteHandle:
        with self._lock:
            if note_id not in self._notes:
                raise KeyError(note_id)
            return NoteHandle(self, note_id, self._live[note_id])

    def _resolve(self, ref: str | NoteHandle) -> str:
        if isinstance(ref, NoteHandle):
            if ref._wallet is not self:
                raise WalletError("handle belongs to another wallet")
            ref._check()
            return ref.note_id
        if ref not in self._notes:
            raise KeyError(ref)
        return ref

    @contextmanager
    def checkout(self, ref: str | NoteHandle):
        """Exclusive, in-place access to one note."""
        with self._lock:
            note_id = self._resolve(ref)
            view = _Checkout(self._notes[note_id].copy())
            yield view
            self._notes[note_id] = self._check_amplitudes(view.amplitudes)

    def take(self, ref: str | NoteHandle) -> np.ndarray:
        with self._lock:
            note_id = self._resolve(ref)
            del self._live[note_id]
            return self._notes.pop(note_id)

    def transfer(self, ref: str | NoteHandle, dest: Wallet) -> NoteHandle:
        if dest is self:
            raise WalletError("transfer to the same wallet")
        if (dest.level, dest.basis, dest.dim) != (self.level, self.basis, self.dim):
            raise WalletError("destination wallet uses a different protocol context")
        amp = self.take(ref)
        return dest.handle(dest.deposit(amp))

    def dumps(self) -> str:
        with self._lock:
            notes = {
                nid: [[f"{z.real:.17g}", f"{z.imag:.17g}"] for z in amp.ravel()]
                for nid, amp in sorted(self._notes.items())
            }
            doc = {
                "basis": self.basis,
                "dim": self.dim,
                "format": WALLET_FORMAT,
                "issued": self._issued,
                "level": self.level,
                "notes": notes,
            }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"

    @classmethod
    def loads(cls, text: str) -> Wallet:
        doc = json.loads(text)
        if doc.get("format") != WALLET_FORMAT:
            raise WalletError("unrecognised wallet format")
        w = cls(int(doc["level"]), str(doc["basis"]), int(doc["dim"]))
        for nid, pairs in doc["notes"].items():
            amp = np.array([complex(float(re), float(im)) for re, im in pairs]).reshape(w.dim, w.dim)
            w._notes[nid] = w._check_amplitudes(amp)
            w._live[nid] = 0
        w._issued = int(doc["issued"])
        return w

    def save(self, path: str | Path) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(self.dumps())
        tmp.replace(path)

    @classmethod
    def load(cls, path: str | Path) -> Wallet:
        return cls.loads(Path(path).read_text())
