"""
PoX protocol

Wire format, verifier sessions, the prover device and its untrusted runtime,
and the transports that carry frames between them.
"""

from pox_protocol.device import PoxDevice
from pox_protocol.errors import InstallError, ProtocolError, RequestRefused, WireFormatError
from pox_protocol.prover import Prover, store_bytes
from pox_protocol.rounds import RoundResult, run_round
from pox_protocol.transport import (
    DuplexChannel,
    prover_loop,
    read_frame,
    serve_prover,
    server_address,
    verify_over_channel,
    verify_over_socket,
    write_frame,
)
from pox_protocol.verifier import SessionState, Verifier, VerifierSession
from pox_protocol.wire import (
    OR_BOTTOM,
    REQUEST_HEADER_SIZE,
    RESPONSE_HEADER_SIZE,
    WIRE_VERSION,
    Request,
    Response,
    decode_request,
    decode_response,
    encode,
)

__all__ = [
    "DuplexChannel",
    "InstallError",
    "OR_BOTTOM",
    "PoxDevice",
    "ProtocolError",
    "Prover",
    "REQUEST_HEADER_SIZE",
    "RESPONSE_HEADER_SIZE",
    "Request",
    "RequestRefused",
    "Response",
    "RoundResult",
    "SessionState",
    "Verifier",
    "VerifierSession",
    "WIRE_VERSION",
    "WireFormatError",
    "decode_request",
    "decode_response",
    "encode",
    "prover_loop",
    "read_frame",
    "run_round",
    "serve_prover",
    "server_address",
    "store_bytes",
    "verify_over_channel",
    "verify_over_socket",
    "write_frame",
]

__version__ = "0.1.0"
