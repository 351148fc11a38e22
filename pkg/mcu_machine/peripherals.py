"""
Memory-mapped GPIO port 4: P4IN, P4OUT, P4DIR, P4SEL.

P4IN replays a scripted bit stream (the sensor line); P4OUT records every
write so the buzzer output can be asserted after a run.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import List, Tuple

logger = logging.getLogger(__name__)

P4IN = 0x1C
P4OUT = 0x1D
P4DIR = 0x1E
P4SEL = 0x1F


@dataclass
class GpioPort:
    """Port 4 registers at base..base+3."""

    base: int = P4IN
    input_bits: List[int] = field(default_factory=list)
    out_log: List[Tuple[int, int]] = field(default_factory=list)
    regs: List[int] = field(default_factory=lambda: [0, 0, 0, 0])
    _cursor: int = 0

    @classmethod
    def scripted(cls, seed: int, n_bits: int, base: int = P4IN) -> "GpioPort":
        """Port whose input line yields n_bits seeded pseudo-random bits."""
        rng = random.Random(seed)
        return cls(base=base, input_bits=[rng.getrandbits(1) for _ in range(n_bits)])

    def owns(self, addr: int) -> bool:
        return self.base <= addr <= self.base + 3

    def read(self, addr: int) -> int:
        offset = addr - self.base
        if offset == 0:
            if self._cursor < len(self.input_bits):
                bit = self.input_bits[self._cursor]
                self._cursor += 1
            else:
                bit = 0
            self.regs[0] = bit
            return bit
        return self.regs[offset]

    def write(self, addr: int, value: int, cycle: int) -> None:
        offset = addr - self.base
        if offset == 0:
            return  # input register is read-only
        self.regs[offset] = value & 0xFF
        if offset == 1:
            self.out_log.append((cycle, value & 0xFF))
            logger.debug("P4OUT <- 0x%02X at cycle %d", value & 0xFF, cycle)

    @property
    def bits_consumed(self) -> int:
        return self._cursor
