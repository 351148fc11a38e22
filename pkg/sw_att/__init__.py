"""
SW-Att

Key derivation, attested-memory serialization, the HMAC measurement and the
ROM routine that performs it cycle by cycle.
"""

from sw_att.attest import (
    SwAtt,
    SwAttTiming,
    attest,
    attested_size,
    cycle_cost,
    serialize_attested,
    serialize_fields,
)
from sw_att.crypto import KEY_SIZE, MAC_SIZE, derive_key, hmac_sha256, mac_equal

__all__ = [
    "KEY_SIZE",
    "MAC_SIZE",
    "SwAtt",
    "SwAttTiming",
    "attest",
    "attested_size",
    "cycle_cost",
    "derive_key",
    "hmac_sha256",
    "mac_equal",
    "serialize_attested",
    "serialize_fields",
]

__version__ = "0.1.0"
