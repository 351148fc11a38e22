"""
Byte-exact frames exchanged between verifier and prover.

Request  = version(1) | chal(32) | er_min | er_max | or_min | or_max | s_len | s
Response = h(32) | o_len | o
All multi-byte integers are 16-bit little-endian. OR = (0xFFFF, 0xFFFF) means
no output region; s_len = 0 means "execute what is already installed".
"""

import struct
from typing import Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from pox_protocol.errors import WireFormatError

WIRE_VERSION = 0x01
CHAL_SIZE = 32
H_SIZE = 32
OR_BOTTOM = 0xFFFF

_REQ_HEAD = struct.Struct("<B32sHHHHH")
_RESP_HEAD = struct.Struct("<32sH")

REQUEST_HEADER_SIZE = _REQ_HEAD.size
RESPONSE_HEADER_SIZE = _RESP_HEAD.size


class Request(BaseModel):
    """XRequest message."""

    model_config = ConfigDict(frozen=True)

    version: int = Field(WIRE_VERSION, description="Wire format version")
    chal: bytes = Field(..., description="Fresh 32-byte challenge")
    er_min: int = Field(..., ge=0, le=0xFFFF, description="First byte of the execution region")
    er_max: int = Field(..., ge=0, le=0xFFFF, description="Last byte of the execution region")
    or_min: int = Field(OR_BOTTOM, ge=0, le=0xFFFF, description="First byte of the output region")
    or_max: int = Field(OR_BOTTOM, ge=0, le=0xFFFF, description="Last byte of the output region")
    s: bytes = Field(b"", description="Executable image; empty means use the installed code")

    @field_validator("version")
    @classmethod
    def _known_version(cls, v: int) -> int:
        if v != WIRE_VERSION:
            raise ValueError(f"unsupported wire version {v}")
        return v

    @field_validator("chal")
    @classmethod
    def _chal_size(cls, v: bytes) -> bytes:
        if len(v) != CHAL_SIZE:
            raise ValueError(f"chal must be {CHAL_SIZE} bytes")
        return v

    @field_validator("s")
    @classmethod
    def _s_fits(cls, v: bytes) -> bytes:
        if len(v) > 0xFFFF:
            raise ValueError("s longer than 65535 bytes")
        return v

    @property
    def s_len(self) -> int:
        return len(self.s)

    @property
    def or_is_bottom(self) -> bool:
        return self.or_min == OR_BOTTOM and self.or_max == OR_BOTTOM

    @property
    def expected_o_len(self) -> int:
        if self.or_is_bottom or self.or_min > self.or_max:
            return 0
        return self.or_max - self.or_min + 1

    def encode(self) -> bytes:
        return (
            _REQ_HEAD.pack(
                self.version, self.chal, self.er_min, self.er_max, self.or_min, self.or_max, len(self.s)
            )
            + self.s
        )

    @classmethod
    def decode(cls, frame: bytes) -> "Request":
        if len(frame) < _REQ_HEAD.size:
            raise WireFormatError(f"request frame too short: {len(frame)} < {_REQ_HEAD.size}")
        version, chal, er_min, er_max, or_min, or_max, s_len = _REQ_HEAD.unpack_from(frame, 0)
        if version != WIRE_VERSION:
            raise WireFormatError(f"version mismatch: got 0x{version:02X}, expected 0x{WIRE_VERSION:02X}")
        body = frame[_REQ_HEAD.size :]
        if len(body) < s_len:
            raise WireFormatError(f"s_len {s_len} overflows the frame ({len(body)} bytes left)")
        if len(body) > s_len:
            raise WireFormatError(f"{len(body) - s_len} trailing bytes after request")
        return cls(
            version=version, chal=chal, er_min=er_min, er_max=er_max, or_min=or_min, or_max=or_max, s=bytes(body)
        )


class Response(BaseModel):
    """XProve result: the MAC and the claimed output."""

    model_config = ConfigDict(frozen=True)

    h: bytes = Field(..., description="HMAC over ER, OR and METADATA")
    o: bytes = Field(b"", description="Contents of the output region")

    @field_validator("h")
    @classmethod
    def _h_size(cls, v: bytes) -> bytes:
        if len(v) != H_SIZE:
            raise ValueError(f"h must be {H_SIZE} bytes")
        return v

    @field_validator("o")
    @classmethod
    def _o_fits(cls, v: bytes) -> bytes:
        if len(v) > 0xFFFF:
            raise ValueError("o longer than 65535 bytes")
        return v

    @property
    def o_len(self) -> int:
        return len(self.o)

    def encode(self) -> bytes:
        return _RESP_HEAD.pack(self.h, len(self.o)) + self.o

    @classmethod
    def decode(cls, frame: bytes) -> "Response":
        if len(frame) < _RESP_HEAD.size:
            raise WireFormatError(f"response frame too short: {len(frame)} < {_RESP_HEAD.size}")
        h, o_len = _RESP_HEAD.unpack_from(frame, 0)
        body = frame[_RESP_HEAD.size :]
        if len(body) < o_len:
            raise WireFormatError(f"o_len {o_len} overflows the frame ({len(body)} bytes left)")
        if len(body) > o_len:
            raise WireFormatError(f"{len(body) - o_len} trailing bytes after response")
        return cls(h=h, o=bytes(body))


def encode(message: Union[Request, Response]) -> bytes:
    return message.encode()


def decode_request(frame: bytes) -> Request:
    return Request.decode(frame)


def decode_response(frame: bytes) -> Response:
    return Response.decode(frame)
