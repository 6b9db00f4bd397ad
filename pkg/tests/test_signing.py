import pytest

from heckemoney.signing import MalformedKey, MintKeys, generate_keys, sign, verify_signature

MSG = b'{"level":23,"primes":[2,3]}'


def flip(data: bytes, bit: int = 0) -> bytes:
    out = bytearray(data)
    out[bit // 8] ^= 1 << (bit % 8)
    return bytes(out)


@pytest.mark.parametrize("scheme", ["hmac-sha256", "ed25519"])
def test_round_trip_and_tampering(scheme):
    keys = generate_keys(b"seed", scheme)
    sig = sign(MSG, keys)
    assert verify_signature(MSG, sig, keys.verification_key, scheme)
    assert not verify_signature(flip(MSG, 3), sig, keys.verification_key, scheme)
    assert not verify_signature(MSG, flip(sig, 11), keys.verification_key, scheme)


def test_deterministic_keys():
    assert generate_keys(b"a") == generate_keys(b"a")
    assert generate_keys(b"a") != generate_keys(b"b")
    assert generate_keys(None) != generate_keys(None)


def test_ed25519_keys_are_asymmetric():
    keys = generate_keys(b"seed", "ed25519")
    assert keys.signing_key != keys.verification_key
    assert "signing" not in repr(keys)


def test_malformed_keys():
    with pytest.raises(MalformedKey):
        sign(MSG, MintKeys("hmac-sha256", b"short", b"short"))
    with pytest.raises(MalformedKey):
        verify_signature(MSG, b"x", b"\x00" * 5)
    with pytest.raises(MalformedKey):
        sign(MSG, MintKeys("ed25519", b"\x00" * 31, b""))
    with pytest.raises(MalformedKey):
        verify_signature(MSG, b"x", b"\x00" * 32, "rsa")
