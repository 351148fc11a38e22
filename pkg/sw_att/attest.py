"""
SW-Att: the trusted ROM routine.

On entry at cr_min it reads the key from kr, derives a one-time key from the
challenge in mr, MACs ER || OR || METADATA and writes the result back into mr.
The routine runs as a per-cycle ROM task inside the machine so every cycle of
the sweep shows up in the trace with pc inside CR.
"""

import logging
import struct
from dataclasses import dataclass
from typing import Iterator

from mcu_machine.layout import MemoryLayout
from mcu_machine.machine import Machine, RomCycle

from pox_monitor.metadata import MetadataRegisters
from sw_att.crypto import KEY_SIZE, MAC_SIZE, derive_key, hmac_sha256

logger = logging.getLogger(__name__)

_TAIL = struct.Struct("<HHHHB")


@dataclass(frozen=True)
class SwAttTiming:
    """Affine cost model: c0 + c1 * attested bytes."""

    c0: int = 10_000
    c1: int = 878

    @classmethod
    def calibrated(cls) -> "SwAttTiming":
        return cls()

    @classmethod
    def fast(cls) -> "SwAttTiming":
        return cls(c0=64, c1=1)

    @classmethod
    def named(cls, name: str) -> "SwAttTiming":
        if name == "calibrated":
            return cls.calibrated()
        if name == "fast":
            return cls.fast()
        raise ValueError(f"unknown timing profile: {name}")

    def cost(self, n_attested_bytes: int) -> int:
        if n_attested_bytes < 0:
            raise ValueError("attested byte count must be >= 0")
        return self.c0 + self.c1 * n_attested_bytes


def cycle_cost(n_attested_bytes: int, timing: SwAttTiming = SwAttTiming()) -> int:
    return timing.cost(n_attested_bytes)


def _region(mem, lo: int, hi: int) -> bytes:
    if lo > hi:
        return b""
    return bytes(mem[lo : hi + 1])


def serialize_fields(er_bytes: bytes, or_bytes: bytes, md: MetadataRegisters) -> bytes:
    """ER || OR || chal || or_min || or_max || er_min || er_max || exec."""
    return (
        er_bytes
        + or_bytes
        + md.chal
        + _TAIL.pack(md.or_min, md.or_max, md.er_min, md.er_max, md.exec & 1)
    )


def serialize_attested(mem, layout: MemoryLayout, md: MetadataRegisters) -> bytes:
    er_bytes = _region(mem, md.er_min, md.er_max)
    or_range = md.or_range()
    or_bytes = _region(mem, *or_range) if or_range else b""
    return serialize_fields(er_bytes, or_bytes, md)


def attested_size(md: MetadataRegisters) -> int:
    er = md.er_max - md.er_min + 1 if md.er_min <= md.er_max else 0
    or_range = md.or_range()
    return er + (or_range[1] - or_range[0] + 1 if or_range else 0)


def attest(mem, layout: MemoryLayout, md: MetadataRegisters) -> bytes:
    """HMAC(KDF(K, chal), ER || OR || METADATA) with K from kr and chal from mr."""
    key = bytes(mem[layout.kr.start : layout.kr.start + KEY_SIZE])
    chal = bytes(mem[layout.mr.start : layout.mr.start + MAC_SIZE])
    return hmac_sha256(derive_key(key, chal), serialize_attested(mem, layout, md))


class SwAtt:
    """ROM routine factory registered with a Machine as its cr_min entry."""

    KEY_READ_CYCLES = KEY_SIZE
    MR_WRITE_CYCLES = MAC_SIZE

    def __init__(self, timing: SwAttTiming = SwAttTiming()):
        self.timing = timing
        self.runs = 0

    def sweep_length(self, md: MetadataRegisters) -> int:
        return max(self.timing.cost(attested_size(md)), self.KEY_READ_CYCLES + self.MR_WRITE_CYCLES)

    def __call__(self, machine: Machine) -> Iterator[RomCycle]:
        layout = machine.layout
        mem = machine.state.mem
        md = MetadataRegisters.from_memory(mem, layout)
        length = self.sweep_length(md)
        span = layout.cr.size - 1
        write_from = length - self.MR_WRITE_CYCLES
        logger.debug("SW-Att entered at cycle %d, %d cycles", machine.cycle, length)

        h = b""
        for i in range(length):
            pc = layout.cr.start + (i * span) // (length - 1)
            last = i == length - 1
            if last:
                self.runs += 1
            if i < self.KEY_READ_CYCLES:
                yield RomCycle(pc, r_en=1, d_addr=layout.kr.start + i, last=last)
            elif i >= write_from:
                k = i - write_from
                if k == 0:
                    # attested memory cannot change during the sweep: DMA, IRQ and reset abort it
                    h = attest(mem, layout, MetadataRegisters.from_memory(mem, layout))
                mem[layout.mr.start + k] = h[k]
                yield RomCycle(pc, w_en=1, d_addr=layout.mr.start + k, last=last)
            else:
                yield RomCycle(pc, last=last)
