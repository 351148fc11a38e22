"""
Cycle-level emulator of the prover MCU.

Every call that advances time (step, trigger_reset, raise_irq) emits exactly one
SignalSnapshot and hands it to the registered observers before returning it;
the PoX monitor attaches itself as such an observer.

Memory changes one byte per cycle, at the d_addr (CPU) or dma_addr (DMA) of
that cycle's snapshot. A push therefore takes two cycles: CALL and interrupt
entry write the low byte of the return address, and the following cycle,
still at the same pc, writes the high byte before control moves on.
Interrupt entry keeps irq high on both cycles.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, List, NamedTuple, Optional, Tuple

from mcu_machine.errors import MachineError, MachineHalted
from mcu_machine.events import DmaEvent, DmaScript, EventScript, IrqScript, ResetScript
from mcu_machine.isa import INSTRUCTION_SIZE, InvalidInstruction, Instruction, Opcode, decode
from mcu_machine.layout import DEFAULT_LAYOUT, MemoryLayout
from mcu_machine.peripherals import GpioPort
from mcu_machine.trace import SignalSnapshot

logger = logging.getLogger(__name__)


class AccessKind(str, Enum):
    READ = "read"
    WRITE = "write"
    DMA_READ = "dma_read"
    DMA_WRITE = "dma_write"

    @property
    def is_dma(self) -> bool:
        return self in (AccessKind.DMA_READ, AccessKind.DMA_WRITE)

    @property
    def is_write(self) -> bool:
        return self in (AccessKind.WRITE, AccessKind.DMA_WRITE)


class AccessOutcome(str, Enum):
    ALLOW = "allow"
    DENY_AND_RESET = "deny-and-reset"
    IGNORE = "ignore"


class RomCycle(NamedTuple):
    """One cycle of the trusted ROM routine."""

    pc: int
    r_en: int = 0
    w_en: int = 0
    d_addr: int = 0
    last: bool = False


RomEntry = Callable[["Machine"], Iterator[RomCycle]]
Observer = Callable[[SignalSnapshot], None]


@dataclass
class MachineState:
    """Architectural state of the device."""

    pc: int = 0
    regs: List[int] = field(default_factory=lambda: [0, 0, 0, 0])
    sp: int = 0
    mem: bytearray = field(default_factory=lambda: bytearray(0x10000))
    cycle: int = 0
    halted: bool = False
    irq_enabled: bool = True


class Machine:
    """Single-core 16-bit MCU with DMA, one interrupt line, reset and GPIO."""

    def __init__(
        self,
        layout: MemoryLayout = DEFAULT_LAYOUT,
        gpio: Optional[GpioPort] = None,
        dma: Optional[DmaScript] = None,
        irqs: Optional[IrqScript] = None,
        resets: Optional[ResetScript] = None,
        rom_entry: Optional[RomEntry] = None,
    ):
        self.layout = layout
        self.state = MachineState(sp=layout.stack_top)
        self.gpio = gpio or GpioPort(base=layout.gpio.start)
        self.dma: DmaScript = dma if dma is not None else EventScript()
        self.irqs: IrqScript = irqs if irqs is not None else EventScript()
        self.resets: ResetScript = resets if resets is not None else EventScript()
        self.rom_entry = rom_entry
        self.observers: List[Observer] = []
        self.metadata_version = 0

        self._rom: Optional[Iterator[RomCycle]] = None
        self._pending_reset = False
        # second half of a push: (address, byte, pc to continue at, irq line)
        self._push_tail: Optional[Tuple[int, int, int, int]] = None

        # hot-path bounds
        self._cr = (layout.cr.start, layout.cr.end)
        self._guarded = ((layout.kr.start, layout.kr.end), (layout.xs.start, layout.xs.end))
        self._md = (layout.metadata.start, layout.metadata.end)
        self._exec_addr = layout.exec_addr
        self._data = (layout.data.start, layout.data.end)
        self._ops = {
            Opcode.HALT: self._op_halt,
            Opcode.NOP: self._op_nop,
            Opcode.MOVI: self._op_movi,
            Opcode.LOAD: self._op_load,
            Opcode.STORE: self._op_store,
            Opcode.ADD: self._op_add,
            Opcode.SUB: self._op_sub,
            Opcode.JMP: self._op_jmp,
            Opcode.JZ: self._op_jz,
            Opcode.CALL: self._op_call,
            Opcode.RET: self._op_ret,
            Opcode.RETI: self._op_reti,
        }

    # ------------------------------------------------------------------
    # host-side access (not visible on the monitored wires)

    def load_image(self, addr: int, image: bytes) -> None:
        if addr < 0 or addr + len(image) > 0x10000:
            raise MachineError(f"image at 0x{addr:04X} of {len(image)} bytes exceeds memory")
        self.state.mem[addr : addr + len(image)] = image
        if addr <= self._md[1] and addr + len(image) - 1 >= self._md[0]:
            self.metadata_version += 1

    def peek(self, addr: int, length: int = 1) -> bytes:
        return bytes(self.state.mem[addr : addr + length])

    def set_exec_mirror(self, bit: int) -> None:
        self.state.mem[self._exec_addr] = bit

    def redirect(self, pc: int) -> None:
        """Hand control to code at pc, as the untrusted runtime does between phases."""
        if self._rom is not None:
            raise MachineError("cannot redirect while the ROM routine is running")
        if self._push_tail is not None:
            raise MachineError("cannot redirect in the middle of a push")
        self.state.pc = pc & 0xFFFF
        self.state.halted = False

    @property
    def cycle(self) -> int:
        return self.state.cycle

    @property
    def halted(self) -> bool:
        return self.state.halted

    @property
    def in_rom(self) -> bool:
        return self._rom is not None

    @property
    def mid_push(self) -> bool:
        """The next cycle writes the high byte of a push."""
        return self._push_tail is not None

    def has_due_event(self) -> bool:
        """Whether step() would fire a reset, DMA or interrupt event this cycle."""
        cycle = self.state.cycle
        if self._pending_reset or self.resets.due(cycle) or self.dma.due(cycle):
            return True
        return self.state.irq_enabled and self.irqs.due(cycle) is not None

    # ------------------------------------------------------------------
    # access control

    def guarded_access(self, addr: int, kind: AccessKind, pc: Optional[int] = None) -> AccessOutcome:
        """Hardware access-control decision for one bus access."""
        pc = self.state.pc if pc is None else pc
        for lo, hi in self._guarded:
            if lo <= addr <= hi:
                if kind.is_dma or not (self._cr[0] <= pc <= self._cr[1]):
                    return AccessOutcome.DENY_AND_RESET
                return AccessOutcome.ALLOW
        if kind.is_write and (addr == self._exec_addr or self._cr[0] <= addr <= self._cr[1]):
            return AccessOutcome.IGNORE
        return AccessOutcome.ALLOW

    def _read(self, addr: int) -> int:
        if self.gpio.owns(addr):
            return self.gpio.read(addr)
        return self.state.mem[addr]

    def _write(self, addr: int, value: int) -> None:
        if self.gpio.owns(addr):
            self.gpio.write(addr, value, self.state.cycle)
            return
        self.state.mem[addr] = value & 0xFF
        if self._md[0] <= addr <= self._md[1]:
            self.metadata_version += 1

    # ------------------------------------------------------------------
    # time

    def _emit(self, snap: SignalSnapshot) -> SignalSnapshot:
        self.state.cycle += 1
        for observer in self.observers:
            observer(snap)
        return snap

    def boot(self) -> SignalSnapshot:
        """Power-on: the first cycle is a reset cycle."""
        return self.trigger_reset()

    def trigger_reset(self) -> SignalSnapshot:
        """Reset cycle: registers and pc zeroed, RAM kept."""
        st = self.state
        if self._rom is not None:
            logger.warning("reset at cycle %d aborted the ROM routine", st.cycle)
        st.pc = 0
        st.regs = [0, 0, 0, 0]
        st.sp = self.layout.stack_top
        st.halted = False
        st.irq_enabled = True
        self._rom = None
        self._pending_reset = False
        self._push_tail = None
        return self._emit(SignalSnapshot(cycle=st.cycle, pc=0, reset=1))

    def raise_irq(self, vector: int) -> SignalSnapshot:
        """Interrupt entry: push the return address over two cycles, then run from vector."""
        st = self.state
        if not st.irq_enabled:
            raise MachineError("interrupts are masked")
        if self._push_tail is not None:
            raise MachineError("interrupt in the middle of a push")
        snap = SignalSnapshot(cycle=st.cycle, pc=st.pc, irq=1)
        if self._rom is not None:
            logger.warning("interrupt during attestation at cycle %d: reset", st.cycle)
            self._rom = None
            self._pending_reset = True
            return self._emit(snap)
        if self._push(st.pc, vector, snap):
            st.halted = False
            st.irq_enabled = False
        return self._emit(snap)

    def _dma_cycle(self, event: DmaEvent) -> SignalSnapshot:
        st = self.state
        snap = SignalSnapshot(cycle=st.cycle, pc=st.pc, dma_en=1, dma_addr=event.addr)
        kind = AccessKind.DMA_WRITE if event.op == "write" else AccessKind.DMA_READ
        outcome = self.guarded_access(event.addr, kind)
        if self._rom is not None:
            logger.warning("DMA during attestation at cycle %d: reset", st.cycle)
            self._rom = None
            self._pending_reset = True
        elif outcome is AccessOutcome.DENY_AND_RESET:
            logger.warning("DMA %s of protected 0x%04X at cycle %d: reset", event.op, event.addr, st.cycle)
            self._pending_reset = True
        elif outcome is AccessOutcome.ALLOW and kind is AccessKind.DMA_WRITE:
            self._write(event.addr, event.value)
        return self._emit(snap)

    def step(self) -> SignalSnapshot:
        """Advance one cycle: a reset, a DMA transfer, an interrupt entry or one instruction."""
        st = self.state
        if self._pending_reset:
            return self.trigger_reset()
        if self.resets.due(st.cycle):
            self.resets.pop()
            return self.trigger_reset()
        if self._push_tail is not None:
            return self._push_tail_cycle()
        if self.dma.due(st.cycle):
            return self._dma_cycle(self.dma.pop())
        irq = self.irqs.due(st.cycle)
        if irq is not None and st.irq_enabled:
            self.irqs.pop()
            return self.raise_irq(irq.vector)
        if self._rom is not None:
            return self._rom_cycle()
        if st.halted:
            raise MachineHalted(f"machine halted at 0x{st.pc:04X}, cycle {st.cycle}")
        return self._execute()

    # ------------------------------------------------------------------
    # instruction execution

    def _execute(self) -> SignalSnapshot:
        st = self.state
        pc = st.pc
        snap = SignalSnapshot(cycle=st.cycle, pc=pc)

        if self._cr[0] <= pc <= self._cr[1]:
            if pc == self._cr[0] and self.rom_entry is not None:
                self._rom = self.rom_entry(self)
                return self._rom_cycle()
            # the reset takes the fetch cycle
            logger.warning("illegal entry into ROM at 0x%04X, cycle %d: reset", pc, st.cycle)
            return self.trigger_reset()

        if pc > 0x10000 - INSTRUCTION_SIZE:
            self._pending_reset = True
            return self._emit(snap)
        try:
            ins = decode(bytes(st.mem[pc : pc + INSTRUCTION_SIZE]))
        except InvalidInstruction as e:
            logger.warning("invalid instruction at 0x%04X (%s), cycle %d: reset", pc, e, st.cycle)
            self._pending_reset = True
            return self._emit(snap)

        next_pc = self._ops[ins.opcode](ins, snap)
        if next_pc is not None:
            st.pc = next_pc & 0xFFFF
        return self._emit(snap)

    def _rom_cycle(self) -> SignalSnapshot:
        st = self.state
        cycle = next(self._rom)
        st.pc = cycle.pc
        snap = SignalSnapshot(cycle=st.cycle, pc=cycle.pc, r_en=cycle.r_en, w_en=cycle.w_en, d_addr=cycle.d_addr)
        if cycle.last:
            self._rom = None
            st.halted = True
        return self._emit(snap)

    def _load(self, addr: int, snap: SignalSnapshot) -> Optional[int]:
        snap.r_en = 1
        snap.d_addr = addr
        if self.guarded_access(addr, AccessKind.READ) is AccessOutcome.DENY_AND_RESET:
            logger.warning("read of protected 0x%04X from 0x%04X at cycle %d: reset", addr, snap.pc, snap.cycle)
            self._pending_reset = True
            return None
        return self._read(addr)

    def _store(self, addr: int, value: int, snap: SignalSnapshot) -> bool:
        snap.w_en = 1
        snap.d_addr = addr
        outcome = self.guarded_access(addr, AccessKind.WRITE)
        if outcome is AccessOutcome.DENY_AND_RESET:
            logger.warning("write of protected 0x%04X from 0x%04X at cycle %d: reset", addr, snap.pc, snap.cycle)
            self._pending_reset = True
            return False
        if outcome is AccessOutcome.ALLOW:
            self._write(addr, value)
        return True

    def _push(self, value: int, next_pc: int, snap: SignalSnapshot) -> bool:
        """Write the low byte now; the next cycle writes the high byte and jumps to next_pc."""
        st = self.state
        sp = st.sp - 2
        if sp < self._data[0]:
            logger.warning("stack overflow at cycle %d: reset", st.cycle)
            snap.w_en, snap.d_addr = 1, sp & 0xFFFF
            self._pending_reset = True
            return False
        if not self._store(sp, value & 0xFF, snap):
            return False
        st.sp = sp
        self._push_tail = (sp + 1, (value >> 8) & 0xFF, next_pc & 0xFFFF, snap.irq)
        return True

    def _push_tail_cycle(self) -> SignalSnapshot:
        st = self.state
        addr, value, next_pc, irq = self._push_tail
        self._push_tail = None
        snap = SignalSnapshot(cycle=st.cycle, pc=st.pc, irq=irq)
        if self._store(addr, value, snap):
            st.pc = next_pc
        return self._emit(snap)

    def _pop(self, snap: SignalSnapshot) -> Optional[int]:
        st = self.state
        if st.sp + 2 > self.layout.stack_top:
            logger.warning("stack underflow at cycle %d: reset", st.cycle)
            self._pending_reset = True
            return None
        snap.r_en, snap.d_addr = 1, st.sp
        value = st.mem[st.sp] | (st.mem[st.sp + 1] << 8)
        st.sp += 2
        return value

    def _op_halt(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        self.state.halted = True
        return None

    def _op_nop(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        return snap.pc + INSTRUCTION_SIZE

    def _op_movi(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        self.state.regs[ins.ra] = ins.imm
        return snap.pc + INSTRUCTION_SIZE

    def _op_load(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        value = self._load(ins.imm, snap)
        if value is None:
            return None
        self.state.regs[ins.ra] = value
        return snap.pc + INSTRUCTION_SIZE

    def _op_store(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        if not self._store(ins.imm, self.state.regs[ins.ra] & 0xFF, snap):
            return None
        return snap.pc + INSTRUCTION_SIZE

    def _op_add(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        regs = self.state.regs
        regs[ins.ra] = (regs[ins.ra] + regs[ins.rb]) & 0xFFFF
        return snap.pc + INSTRUCTION_SIZE

    def _op_sub(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        regs = self.state.regs
        regs[ins.ra] = (regs[ins.ra] - regs[ins.rb]) & 0xFFFF
        return snap.pc + INSTRUCTION_SIZE

    def _op_jmp(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        return ins.imm

    def _op_jz(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        return ins.imm if self.state.regs[ins.ra] == 0 else snap.pc + INSTRUCTION_SIZE

    def _op_call(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        self._push(snap.pc + INSTRUCTION_SIZE, ins.imm, snap)
        return None

    def _op_ret(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        return self._pop(snap)

    def _op_reti(self, ins: Instruction, snap: SignalSnapshot) -> Optional[int]:
        target = self._pop(snap)
        if target is not None:
            self.state.irq_enabled = True
        return target
