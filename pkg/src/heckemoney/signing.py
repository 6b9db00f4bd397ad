"""Detached signatures over serial numbers.

The default scheme is a keyed hash (HMAC-SHA256).  It is symmetric, so its
"verification key" is the signing key itself; that is adequate for a
single-process simulation and nothing more.  Ed25519 from ``cryptography`` is
available as a drop-in public-key scheme.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass


class MalformedKey(ValueError):
    """Malformed key material."""


@dataclass(frozen=True, repr=False)
class MintKeys:
    scheme: str
    signing_key: bytes
    verification_key: bytes

    def __repr__(self) -> str:
        return f"MintKeys(scheme={self.scheme!r}, verification_key={self.verification_key.hex()[:16]}...)"


class KeyedHashScheme:
    name = "hmac-sha256"
    key_bytes = 32

    def keygen(self, seed: bytes | None = None) -> MintKeys:
        key = hashlib.sha256(b"heckemoney-mint" + seed).digest() if seed is not None else secrets.token_bytes(32)
        return MintKeys(self.name, key, key)

    def _check(self, key: bytes) -> None:
        if not isinstance(key, (bytes, bytearray)) or len(key) < 16:
            raise MalformedKey("keyed-hash keys must be at least 16 bytes")

    def sign(self, msg: bytes, signing_key: bytes) -> bytes:
        self._check(signing_key)
        return hmac.new(signing_key, msg, hashlib.sha256).digest()

    def verify(self, msg: bytes, sig: bytes, verification_key: bytes) -> bool:
        self._check(verification_key)
        return hmac.compare_digest(hmac.new(verification_key, msg, hashlib.sha256).digest(), sig)


class Ed25519Scheme:
    name = "ed25519"

    def keygen(self, seed: bytes | None = None) -> MintKeys:
        from cryptography.hazmat.primitives import serialization
        from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

        if seed is None:
            sk = Ed25519PrivateKey.generate()
        else:
            sk = Ed25519PrivateKey.from_private_bytes(hashlib.sha256(b"heckemoney-mint" + seed).digest())
        raw = serialization.Encoding.Raw
        priv = sk.private_bytes(raw, serialization.PrivateFormat.Raw, serialization.NoEncryption())
        pub = sk.public_key().public_bytes(raw, serialization.PublicFormat.Raw)
        return MintKeys(self.name, priv, pub)

    def sign(self, msg: bytes, signing_key: bytes) -> bytes:
        from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

        if len(signing_key) != 32:
            raise MalformedKey("ed25519 private keys are 32 bytes")
        return Ed25519PrivateKey.from_private_bytes(signing_key).sign(msg)

    def verify(self, msg: bytes, sig: bytes, verification_key: bytes) -> bool:
        from cryptography.exceptions import InvalidSignature
        from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PublicKey

        if len(verification_key) != 32:
            raise MalformedKey("ed25519 public keys are 32 bytes")
        try:
            Ed25519PublicKey.from_public_bytes(verification_key).verify(sig, msg)
        except InvalidSignature:
            return False
        return True


SCHEMES = {s.name: s for s in (KeyedHashScheme(), Ed25519Scheme())}
DEFAULT_SCHEME = KeyedHashScheme.name


def generate_keys(seed: bytes | None = None, scheme: str = DEFAULT_SCHEME) -> MintKeys:
    return SCHEMES[scheme].keygen(seed)


def sign(msg: bytes, keys: MintKeys) -> bytes:
    return SCHEMES[keys.scheme].sign(msg, keys.signing_key)


def verify_signature(msg: bytes, sig: bytes, verification_key: bytes, scheme: str = DEFAULT_SCHEME) -> bool:
    if scheme not in SCHEMES:
        raise MalformedKey(f"unknown signature scheme {scheme!r}")
    return SCHEMES[scheme].verify(msg, sig, verification_key)
