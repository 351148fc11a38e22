"""
Address map of the simulated device.
"""

from itertools import combinations
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mcu_machine.errors import LayoutError

ADDRESS_SPACE = 0x10000
METADATA_SIZE = 9 + 32
EXEC_OFFSET = 8


class AddressRange(BaseModel):
    """Inclusive address range [start, end]."""

    model_config = ConfigDict(frozen=True)

    start: int = Field(..., ge=0, le=0xFFFF)
    end: int = Field(..., ge=0, le=0xFFFF)

    @model_validator(mode="after")
    def _ordered(self):
        if self.start > self.end:
            raise ValueError(f"range start 0x{self.start:04X} > end 0x{self.end:04X}")
        return self

    def __contains__(self, addr: int) -> bool:
        return self.start <= addr <= self.end

    @property
    def size(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "AddressRange") -> bool:
        return self.start <= other.end and other.start <= self.end

    def covers(self, start: int, end: int) -> bool:
        return self.start <= start and end <= self.end

    def __str__(self) -> str:
        return f"[0x{self.start:04X},0x{self.end:04X}]"


def _r(start: int, end: int) -> AddressRange:
    return AddressRange(start=start, end=end)


class MemoryLayout(BaseModel):
    """Regions of the 64 KiB address space."""

    model_config = ConfigDict(frozen=True)

    cr: AddressRange = Field(default_factory=lambda: _r(0xA000, 0xBFFF), description="SW-Att ROM")
    kr: AddressRange = Field(default_factory=lambda: _r(0x9F00, 0x9F1F), description="Key region")
    mr: AddressRange = Field(default_factory=lambda: _r(0x9E00, 0x9E1F), description="Challenge/MAC region")
    xs: AddressRange = Field(default_factory=lambda: _r(0x9C00, 0x9DFF), description="SW-Att exclusive stack")
    metadata: AddressRange = Field(
        default_factory=lambda: _r(0x0020, 0x0048), description="Monitor register file plus challenge slot"
    )
    prog: AddressRange = Field(default_factory=lambda: _r(0xE000, 0xFFFF), description="Installable program memory")
    data: AddressRange = Field(default_factory=lambda: _r(0x1000, 0x8FFF), description="RAM, stack at the top")
    gpio: AddressRange = Field(default_factory=lambda: _r(0x001C, 0x001F), description="GPIO port 4 registers")
    aux: AddressRange = Field(
        default_factory=lambda: _r(0x0100, 0x0FFF), description="Untrusted runtime code and handlers"
    )

    @model_validator(mode="after")
    def _disjoint(self):
        if self.metadata.size != METADATA_SIZE:
            raise LayoutError(
                f"metadata must span exactly {METADATA_SIZE} bytes, got {self.metadata.size}"
            )
        if self.mr.size != 32 or self.kr.size != 32:
            raise LayoutError("kr and mr must be 32 bytes each")
        regions = self.regions()
        for (a, ra), (b, rb) in combinations(regions.items(), 2):
            if ra.overlaps(rb):
                raise LayoutError(f"regions {a} {ra} and {b} {rb} overlap")
        return self

    def regions(self) -> Dict[str, AddressRange]:
        return {
            "cr": self.cr,
            "kr": self.kr,
            "mr": self.mr,
            "xs": self.xs,
            "metadata": self.metadata,
            "prog": self.prog,
            "data": self.data,
            "gpio": self.gpio,
            "aux": self.aux,
        }

    @property
    def exec_addr(self) -> int:
        """Address of the hardware-owned EXEC byte."""
        return self.metadata.start + EXEC_OFFSET

    @property
    def stack_top(self) -> int:
        """Initial stack pointer: one past the end of the data region."""
        return self.data.end + 1

    def region_of(self, addr: int) -> Optional[str]:
        for name, rng in self.regions().items():
            if addr in rng:
                return name
        return None

    def with_overrides(self, overrides: Dict[str, Dict[str, int]]) -> "MemoryLayout":
        """Copy with some regions replaced, e.g. {"prog": {"start": ..., "end": ...}}."""
        fields = {name: rng for name, rng in self.regions().items()}
        for name, bounds in overrides.items():
            if name not in fields:
                raise LayoutError(f"unknown region: {name}")
            fields[name] = AddressRange(**bounds)
        return MemoryLayout(**fields)


DEFAULT_LAYOUT = MemoryLayout()
