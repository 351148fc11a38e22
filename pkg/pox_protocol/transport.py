"""
Transports for PoX frames.

DuplexChannel is an in-process pair of asyncio queues; the loopback mode runs
the prover behind asyncio streams with a 4-byte big-endian length prefix.
Both carry the same encoded Request/Response frames.
"""

import asyncio
import logging
import struct
from typing import Optional, Tuple

from pox_protocol.errors import WireFormatError
from pox_protocol.prover import Prover
from pox_protocol.verifier import Bounds, Verifier
from pox_protocol.wire import Response

logger = logging.getLogger(__name__)

_LENGTH = struct.Struct(">I")
MAX_FRAME = 0x10000 + 64


class DuplexChannel:
    """Two one-way queues; the verifier end and the prover end see them swapped."""

    def __init__(self):
        self.to_prover: asyncio.Queue = asyncio.Queue()
        self.to_verifier: asyncio.Queue = asyncio.Queue()

    async def request(self, frame: bytes) -> bytes:
        await self.to_prover.put(frame)
        return await self.to_verifier.get()

    async def close(self) -> None:
        await self.to_prover.put(None)


async def prover_loop(channel: DuplexChannel, prover: Prover) -> int:
    """Answer frames until the channel is closed; returns how many were served."""
    served = 0
    while True:
        frame = await channel.to_prover.get()
        if frame is None:
            return served
        await channel.to_verifier.put(await asyncio.to_thread(prover.serve_frame, frame))
        served += 1


async def verify_over_channel(
    verifier: Verifier, channel: DuplexChannel, s: Optional[bytes], er: Bounds, or_: Optional[Bounds] = None
) -> int:
    request = verifier.xrequest(s, er, or_)
    response = Response.decode(await channel.request(request.encode()))
    return verifier.xverify(response, request.chal)


async def read_frame(reader: asyncio.StreamReader) -> Optional[bytes]:
    """Next length-prefixed frame, or None at a clean end of stream."""
    try:
        head = await reader.readexactly(_LENGTH.size)
    except asyncio.IncompleteReadError as e:
        if e.partial:
            raise WireFormatError("stream ended inside a length prefix") from e
        return None
    (length,) = _LENGTH.unpack(head)
    if length > MAX_FRAME:
        raise WireFormatError(f"frame length {length} exceeds {MAX_FRAME}")
    try:
        return await reader.readexactly(length)
    except asyncio.IncompleteReadError as e:
        raise WireFormatError(f"stream ended after {len(e.partial)} of {length} frame bytes") from e


async def write_frame(writer: asyncio.StreamWriter, frame: bytes) -> None:
    writer.write(_LENGTH.pack(len(frame)) + frame)
    await writer.drain()


async def serve_prover(prover: Prover, host: str = "127.0.0.1", port: int = 0) -> asyncio.AbstractServer:
    """Start a loopback server answering every frame with the prover; port 0 picks a free one."""
    lock = asyncio.Lock()

    async def handle(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        try:
            while (frame := await read_frame(reader)) is not None:
                async with lock:
                    reply = await asyncio.to_thread(prover.serve_frame, frame)
                await write_frame(writer, reply)
        except WireFormatError as e:
            logger.warning("dropping connection: %s", e)
        finally:
            writer.close()
            await writer.wait_closed()

    return await asyncio.start_server(handle, host, port)


def server_address(server: asyncio.AbstractServer) -> Tuple[str, int]:
    host, port = server.sockets[0].getsockname()[:2]
    return host, port


async def verify_over_socket(
    verifier: Verifier, host: str, port: int, s: Optional[bytes], er: Bounds, or_: Optional[Bounds] = None
) -> int:
    """One round against a loopback prover."""
    reader, writer = await asyncio.open_connection(host, port)
    try:
        request = verifier.xrequest(s, er, or_)
        await write_frame(writer, request.encode())
        frame = await read_frame(reader)
        if frame is None:
            raise WireFormatError("prover closed the connection without answering")
        return verifier.xverify(Response.decode(frame), request.chal)
    finally:
        writer.close()
        await writer.wait_closed()
