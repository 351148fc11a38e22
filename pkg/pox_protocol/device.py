"""
The prover device: MCU, PoX monitor and SW-Att wired together.

The monitor observes every cycle the machine emits, projects it through the
current METADATA, backfills the snapshot's exec bit and mirrors EXEC into the
hardware-owned metadata byte that SW-Att reads.
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

from mcu_machine.events import DmaScript, IrqScript, ResetScript
from mcu_machine.layout import DEFAULT_LAYOUT, MemoryLayout
from mcu_machine.machine import Machine
from mcu_machine.peripherals import GpioPort
from mcu_machine.trace import SignalSnapshot, write_trace

from pox_monitor.fsm import SubmoduleTable
from pox_monitor.history import MetadataHistory, write_sidecar
from pox_monitor.inputs import Projector
from pox_monitor.metadata import MetadataRegisters
from pox_monitor.monitor import PoxMonitor
from sw_att.attest import SwAtt, SwAttTiming
from sw_att.crypto import KEY_SIZE

logger = logging.getLogger(__name__)


class PoxDevice:
    """A prover MCU with the PoX monitor attached."""

    def __init__(
        self,
        key: bytes,
        layout: MemoryLayout = DEFAULT_LAYOUT,
        timing: Optional[SwAttTiming] = None,
        tables: Optional[Sequence[SubmoduleTable]] = None,
        gpio: Optional[GpioPort] = None,
        dma: Optional[DmaScript] = None,
        irqs: Optional[IrqScript] = None,
        resets: Optional[ResetScript] = None,
        record: bool = True,
    ):
        if len(key) != KEY_SIZE:
            raise ValueError(f"device key must be {KEY_SIZE} bytes")
        self.layout = layout
        self.sw_att = SwAtt(timing or SwAttTiming.fast())
        self.monitor = PoxMonitor(tables)
        self.machine = Machine(
            layout, gpio=gpio, dma=dma, irqs=irqs, resets=resets, rom_entry=self.sw_att
        )
        self.machine.load_image(layout.kr.start, key)
        self.history = MetadataHistory()
        self.trace: List[SignalSnapshot] = []
        self.record = record

        self.md = MetadataRegisters.from_memory(self.machine.state.mem, layout)
        self._project = Projector(self.md, layout)
        self._md_version = -1
        self.machine.observers.append(self._observe)
        self.machine.boot()

    def _observe(self, snap: SignalSnapshot) -> None:
        m = self.machine
        if m.metadata_version != self._md_version:
            self._md_version = m.metadata_version
            self.md = MetadataRegisters.from_memory(m.state.mem, self.layout)
            self._project = Projector(self.md, self.layout)
            self.history.record(snap.cycle, self.md)
        bit = self.monitor.advance(self._project(snap))
        snap.exec = bit
        m.set_exec_mirror(bit)
        if self.record:
            self.trace.append(snap)

    @property
    def exec(self) -> int:
        return self.monitor.state.exec

    @property
    def cycle(self) -> int:
        return self.machine.cycle

    def metadata(self) -> MetadataRegisters:
        """Live register file, EXEC included."""
        return MetadataRegisters.from_memory(self.machine.state.mem, self.layout)

    def output(self) -> bytes:
        """Contents of the output region named by the live metadata."""
        bounds = self.metadata().or_range()
        if bounds is None:
            return b""
        return self.machine.peek(bounds[0], bounds[1] - bounds[0] + 1)

    def run(self, budget: Optional[int] = None) -> int:
        """Step until the machine halts with no event due, or budget cycles pass.

        A push in flight always completes, so the count may exceed budget by
        one. Returns the number of cycles stepped.
        """
        m = self.machine
        steps = 0
        while not m.halted or m.has_due_event():
            if budget is not None and steps >= budget and not m.mid_push:
                logger.warning("cycle budget of %d exhausted at cycle %d (pc=0x%04X)", budget, m.cycle, m.state.pc)
                break
            m.step()
            steps += 1
        return steps

    def save_trace(self, path: Union[str, Path]) -> int:
        """Write the recorded trace as JSON Lines plus its metadata sidecar."""
        count = write_trace(path, self.trace)
        write_sidecar(path, self.layout, self.history)
        logger.debug("wrote %d cycles to %s", count, path)
        return count
