"""
HMAC-SHA-256 primitives used by the attestation routine and the verifier.
"""

import hashlib
import hmac

KEY_SIZE = 32
MAC_SIZE = 32


def hmac_sha256(key: bytes, message: bytes) -> bytes:
    return hmac.new(key, message, hashlib.sha256).digest()


def derive_key(master: bytes, chal: bytes) -> bytes:
    """One-time key for a challenge: HMAC-SHA-256(master, chal)."""
    if len(master) != KEY_SIZE:
        raise ValueError(f"master key must be {KEY_SIZE} bytes")
    return hmac_sha256(master, chal)


def mac_equal(a: bytes, b: bytes) -> bool:
    return hmac.compare_digest(a, b)
