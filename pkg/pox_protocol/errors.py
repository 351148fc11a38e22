"""
Exceptions raised by the PoX protocol layer.

A rejected proof is not an exception: xverify returns 0.
"""


class ProtocolError(Exception):
    """Base class for protocol errors."""


class WireFormatError(ProtocolError):
    """A frame could not be decoded (short buffer, version, lengths, trailing bytes)."""


class RequestRefused(ProtocolError):
    """The verifier refuses to build a request with illegal regions."""


class InstallError(ProtocolError):
    """The prover's auxiliary software could not install the request."""
