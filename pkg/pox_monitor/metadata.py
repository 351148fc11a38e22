"""
The monitor's METADATA register file.

Byte layout from metadata.start:
    +0 er_min  +2 er_max  +4 or_min  +6 or_max   (16-bit little-endian)
    +8 exec    (hardware-owned)
    +9 chal    (32 bytes)
"""

import struct
from dataclasses import dataclass, replace
from typing import Dict, Literal, Optional, Tuple

from mcu_machine.layout import EXEC_OFFSET, METADATA_SIZE, MemoryLayout

OR_BOTTOM = 0xFFFF
REGISTER_FILE_SIZE = 9
CHAL_SIZE = 32
CHAL_OFFSET = 9

FIELD_OFFSETS: Dict[str, Tuple[int, int]] = {
    "er_min": (0, 2),
    "er_max": (2, 2),
    "or_min": (4, 2),
    "or_max": (6, 2),
    "exec": (EXEC_OFFSET, 1),
    "chal": (CHAL_OFFSET, CHAL_SIZE),
}

_REGS = struct.Struct("<HHHHB")


@dataclass(frozen=True)
class MetadataRegisters:
    er_min: int = 0
    er_max: int = 0
    or_min: int = OR_BOTTOM
    or_max: int = OR_BOTTOM
    exec: int = 0
    chal: bytes = bytes(CHAL_SIZE)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "MetadataRegisters":
        if len(raw) != METADATA_SIZE:
            raise ValueError(f"metadata must be {METADATA_SIZE} bytes, got {len(raw)}")
        er_min, er_max, or_min, or_max, exec_byte = _REGS.unpack_from(raw, 0)
        return cls(er_min, er_max, or_min, or_max, exec_byte & 1, bytes(raw[CHAL_OFFSET:]))

    @classmethod
    def from_memory(cls, mem, layout: MemoryLayout) -> "MetadataRegisters":
        start = layout.metadata.start
        return cls.from_bytes(bytes(mem[start : start + METADATA_SIZE]))

    def to_bytes(self) -> bytes:
        return _REGS.pack(self.er_min, self.er_max, self.or_min, self.or_max, self.exec) + self.chal

    @property
    def or_is_bottom(self) -> bool:
        return self.or_min == OR_BOTTOM and self.or_max == OR_BOTTOM

    @property
    def bounds_valid(self) -> bool:
        return self.er_min <= self.er_max and self.or_min <= self.or_max

    def er_cr_disjoint(self, layout: MemoryLayout) -> bool:
        return self.er_max < layout.cr.start or self.er_min > layout.cr.end

    def or_range(self) -> Optional[Tuple[int, int]]:
        """Inclusive OR bounds, or None for an empty/inverted OR."""
        if self.or_is_bottom or self.or_min > self.or_max:
            return None
        return self.or_min, self.or_max


MetadataField = Literal["er_min", "er_max", "or_min", "or_max", "exec", "chal"]


def write_metadata(
    md: MetadataRegisters,
    field: MetadataField,
    value,
    via: Literal["software", "dma"] = "software",
) -> MetadataRegisters:
    """Register-level effect of a software or DMA write; EXEC writes are dropped.

    Both paths change the registers identically; the sub-modules tell them apart
    by the wires (w_meta vs dma_meta).
    """
    if field == "exec":
        return md
    if field == "chal":
        value = bytes(value)
        if len(value) != CHAL_SIZE:
            raise ValueError(f"chal must be {CHAL_SIZE} bytes")
        return replace(md, chal=value)
    if field not in FIELD_OFFSETS:
        raise ValueError(f"unknown metadata field: {field}")
    if not 0 <= int(value) <= 0xFFFF:
        raise ValueError(f"{field} must fit in 16 bits")
    return replace(md, **{field: int(value)})


def field_bytes(field: MetadataField, value) -> Tuple[int, bytes]:
    """(offset, encoded bytes) for writing one field into the register file."""
    offset, size = FIELD_OFFSETS[field]
    if field == "chal":
        return offset, bytes(value)
    return offset, int(value).to_bytes(size, "little")
